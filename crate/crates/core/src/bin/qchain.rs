fn main() {
    std::process::exit(qchain::cli::main());
}
