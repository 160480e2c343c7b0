fn main() {
    std::process::exit(rtasim::cli::run(std::env::args_os()));
}
