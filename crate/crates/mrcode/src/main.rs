fn main() {
    std::process::exit(mrcode::cli::run(std::env::args_os()));
}
