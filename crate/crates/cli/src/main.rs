fn main() {
    if let Some(threads) = std::env::var("HULLPROJ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let code = hullproj_cli::run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
