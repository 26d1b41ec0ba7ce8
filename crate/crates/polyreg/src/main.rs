fn main() {
    std::process::exit(polyreg::cli::run(std::env::args().collect()));
}
