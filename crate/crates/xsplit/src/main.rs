fn main() {
    std::process::exit(xsplit::cli::main_with_exit_code());
}
