fn main() {
    std::process::exit(gwqed_core::cli::main_with_args(std::env::args_os()));
}
