fn main() {
    std::process::exit(gk_core::cli::run(std::env::args_os()));
}
