fn main() {
    std::process::exit(sheafconv::cli::main_with_args(std::env::args_os()));
}
