fn main() {
    std::process::exit(adcs::cli::run(std::env::args_os()));
}
