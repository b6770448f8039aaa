fn main() {
    std::process::exit(hermite_markets::cli::run(std::env::args_os()));
}
