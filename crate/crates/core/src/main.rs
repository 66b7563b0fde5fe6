fn main() {
    std::process::exit(ncqpt::cli::main_with_args(std::env::args_os()));
}
