fn main() {
    std::process::exit(tasep::cli::main_with_args(std::env::args().collect()));
}
