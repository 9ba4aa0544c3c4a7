fn main() {
    std::process::exit(helikon::cli::main_with_args(std::env::args_os()));
}
