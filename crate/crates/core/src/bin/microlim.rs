fn main() {
    std::process::exit(microlim::cli::main());
}
