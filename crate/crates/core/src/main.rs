fn main() {
    std::process::exit(nearcrit::cli::run(std::env::args_os()));
}
