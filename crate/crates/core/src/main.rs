fn main() {
    std::process::exit(syneval::cli::run(std::env::args_os()));
}
