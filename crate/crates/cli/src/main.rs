fn main() {
    std::process::exit(probmorph_cli::main_with_args(std::env::args_os()));
}
