fn main() {
    std::process::exit(trajlens::cli::run(std::env::args_os()));
}
