fn main() {
    std::process::exit(bichrome::cli::main_with_args(std::env::args().collect()));
}
