fn main() {
    std::process::exit(onewave::cli::run(std::env::args_os()));
}
