fn main() {
    std::process::exit(otcnet::cli::main_with_args(std::env::args_os()));
}
