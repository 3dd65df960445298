fn main() {
    std::process::exit(nphmm_cli::main_with_args(std::env::args_os()));
}
