fn main() {
    std::process::exit(quench_renyi::cli::main_with_args(std::env::args_os()));
}
