fn main() {
    std::process::exit(toral_core::cli::run(std::env::args_os()));
}
