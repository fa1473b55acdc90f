fn main() {
    std::process::exit(gapnet_cli::run(std::env::args_os()));
}
