fn main() {
    std::process::exit(wandpack::verifier::cli::main_with_args(std::env::args_os()));
}
