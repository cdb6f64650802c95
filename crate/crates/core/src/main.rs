fn main() {
    std::process::exit(lamcount::cli::main());
}
