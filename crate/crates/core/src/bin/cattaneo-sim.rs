fn main() {
    std::process::exit(cattaneo_similarity::cli::main());
}
