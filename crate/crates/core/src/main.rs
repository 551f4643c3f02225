fn main() {
    std::process::exit(hcube::cli::run(std::env::args_os()));
}
