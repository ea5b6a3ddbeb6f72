fn main() {
    std::process::exit(willmore_cli::run(std::env::args_os()));
}
