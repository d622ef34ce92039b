fn main() { std::process::exit(plaq::cli::run(std::env::args())) }
