fn main() {
    std::process::exit(shiftbc_cli::main_with_args(std::env::args_os()));
}
