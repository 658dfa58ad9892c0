fn main() {
    std::process::exit(surrogate_cli::main_with_args(std::env::args_os()));
}
