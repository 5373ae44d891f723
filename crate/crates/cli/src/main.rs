fn main() {
    std::process::exit(hida_cli::run(std::env::args_os()));
}
