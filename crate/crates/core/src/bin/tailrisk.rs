fn main() {
    std::process::exit(tailrisk::cli::run(std::env::args_os()));
}
