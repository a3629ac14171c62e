fn main() {
    std::process::exit(nullcount::cli::main_with_args(std::env::args_os()));
}
