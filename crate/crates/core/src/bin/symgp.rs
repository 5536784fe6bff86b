fn main() {
    std::process::exit(symgp::cli::main_with_args(std::env::args_os()));
}
