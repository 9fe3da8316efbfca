fn main() {
    std::process::exit(satpart::cli::run(std::env::args_os()));
}
