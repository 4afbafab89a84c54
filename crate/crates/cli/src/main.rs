fn main() {
    std::process::exit(potlab_cli::run(std::env::args_os()));
}
