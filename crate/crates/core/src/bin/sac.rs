fn main() {
    std::process::exit(stochastic_allen_cahn::cli::main_from(std::env::args_os()));
}
