fn main() {
    std::process::exit(qfirstlaw::cli::main_with_args(std::env::args_os()));
}
