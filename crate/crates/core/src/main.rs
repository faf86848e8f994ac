fn main() {
    std::process::exit(okkit::cli::run(std::env::args_os()));
}
