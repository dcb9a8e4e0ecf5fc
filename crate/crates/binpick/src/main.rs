fn main() {
    std::process::exit(binpick::cli::run());
}
