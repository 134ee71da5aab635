fn main() {
    std::process::exit(partial_copula::cli::run_cli(std::env::args_os()));
}
