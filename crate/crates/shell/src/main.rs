fn main() {
    std::process::exit(cogrisk::cli::run(std::env::args_os()));
}
