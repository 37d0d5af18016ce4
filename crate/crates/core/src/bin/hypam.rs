fn main() {
    std::process::exit(hyperbolic_pam::cli::main_with_args(std::env::args_os()));
}
