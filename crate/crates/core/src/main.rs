fn main() {
    std::process::exit(citeforge::cli::main_with_args(std::env::args_os()));
}
