fn main() {
    std::process::exit(aex::cli::run(std::env::args_os()));
}
