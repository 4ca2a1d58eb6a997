fn main() {
    std::process::exit(flatnormal::cli::main());
}
