fn main() {
    std::process::exit(elixa::cli::main_with_args(std::env::args_os()));
}
