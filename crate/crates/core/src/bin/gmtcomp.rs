fn main() {
    std::process::exit(gmtcomp::cli::main_with_args(std::env::args_os()));
}
