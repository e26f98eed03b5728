fn main() {
    std::process::exit(semidensity::cli::run(std::env::args_os()));
}
