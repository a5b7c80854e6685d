fn main() {
    std::process::exit(qrl::cli::run_from(std::env::args_os()));
}
