fn main() {
    std::process::exit(qmarkov::cli::run(std::env::args_os()));
}
