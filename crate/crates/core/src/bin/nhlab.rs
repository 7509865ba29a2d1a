fn main() {
    std::process::exit(nhlab::cli::main_with_args(std::env::args_os()));
}
