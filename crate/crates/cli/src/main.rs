fn main() {
    std::process::exit(gaussnet_cli::cli_main(std::env::args_os()));
}
