fn main() {
    std::process::exit(weaktomo::cli::main());
}
