fn main() {
    std::process::exit(litscreen::cli::run(std::env::args()));
}
