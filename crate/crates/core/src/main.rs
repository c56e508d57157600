fn main() {
    std::process::exit(sle_spectrum::cli::run(std::env::args().collect()));
}
