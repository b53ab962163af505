fn main() {
    std::process::exit(edqueue::cli::run(std::env::args_os()));
}
