fn main() {
    std::process::exit(xeb_core::cli::run_cli(std::env::args_os()));
}
