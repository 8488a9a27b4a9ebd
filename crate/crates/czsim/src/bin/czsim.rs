fn main() {
    std::process::exit(czsim::cli::run(std::env::args_os()));
}
