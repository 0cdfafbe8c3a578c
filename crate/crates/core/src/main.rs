fn main() {
    std::process::exit(debris_core::cli::run(std::env::args_os()));
}
