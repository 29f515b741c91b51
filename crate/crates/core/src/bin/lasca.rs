fn main() {
    std::process::exit(lasca::cli::run_cli(std::env::args_os()));
}
