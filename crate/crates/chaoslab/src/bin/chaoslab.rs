fn main() {
    std::process::exit(chaoslab::cli::run());
}
