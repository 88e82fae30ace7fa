fn main() {
    std::process::exit(adasamp_harness::cli::main_with_args(std::env::args_os()));
}
