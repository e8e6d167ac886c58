fn main() {
    std::process::exit(qcoexist::cli::main());
}
