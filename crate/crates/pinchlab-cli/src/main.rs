fn main() {
    std::process::exit(pinchlab_cli::run(std::env::args_os()));
}
