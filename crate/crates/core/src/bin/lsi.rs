fn main() {
    std::process::exit(lsi_core::cli::run(std::env::args_os()));
}
