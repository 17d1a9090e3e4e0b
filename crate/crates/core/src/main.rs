fn main() {
    std::process::exit(rumorsim::cli::main_with_args(std::env::args_os()));
}
