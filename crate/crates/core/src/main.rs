fn main() {
    std::process::exit(ergm_phase::cli::run(std::env::args_os()));
}
