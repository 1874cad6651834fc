fn main() {
    std::process::exit(sentiforge::cli::main_with_args(std::env::args_os()));
}
