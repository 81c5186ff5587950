fn main() {
    std::process::exit(prefracture::cli::run(std::env::args_os()));
}
