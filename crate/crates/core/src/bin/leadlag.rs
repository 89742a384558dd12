fn main() {
    std::process::exit(leadlag::cli::main_with_args(std::env::args_os()));
}
