fn main() {
    std::process::exit(mveq::cli::run_from(std::env::args_os()));
}
