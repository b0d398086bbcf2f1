fn main() {
    std::process::exit(foresight::cli::run_from(std::env::args_os()));
}
