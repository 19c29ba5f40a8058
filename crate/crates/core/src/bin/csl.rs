fn main() {
    std::process::exit(csl::cli::main_with_args(std::env::args_os()));
}
