fn main() {
    std::process::exit(psdyn_cli::main_with_args(std::env::args_os()));
}
