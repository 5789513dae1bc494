fn main() {
    std::process::exit(crossover::cli::run(std::env::args_os()));
}
