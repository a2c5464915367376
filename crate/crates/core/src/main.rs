fn main() {
    std::process::exit(risdrl::harness::cli::cli_main(std::env::args_os()));
}
