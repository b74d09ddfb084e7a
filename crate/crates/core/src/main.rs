fn main() {
    std::process::exit(barotropic::cli::main_with(std::env::args_os()));
}
