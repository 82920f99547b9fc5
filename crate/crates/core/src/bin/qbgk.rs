fn main() {
    std::process::exit(qbgk::cli::main_with(std::env::args_os()));
}
