fn main() {
    std::process::exit(specdyn::cli::main_with_args(std::env::args_os()));
}
