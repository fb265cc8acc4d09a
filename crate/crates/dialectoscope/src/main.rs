fn main() {
    std::process::exit(dialectoscope::cli::main_with_args(std::env::args_os()));
}
