fn main() {
    std::process::exit(ugrasp::app::cli::run(std::env::args_os()));
}
