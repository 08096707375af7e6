fn main() {
    std::process::exit(polycert::cli::main_with_args(std::env::args_os()));
}
