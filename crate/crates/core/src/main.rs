fn main() {
    std::process::exit(nematic_flow::cli::main_with_args(std::env::args_os()));
}
