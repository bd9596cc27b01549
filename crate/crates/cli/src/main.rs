fn main() {
    std::process::exit(isomarket_cli::run(std::env::args_os()));
}
