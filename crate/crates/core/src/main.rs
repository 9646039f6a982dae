fn main() {
    std::process::exit(attrec::cli::main_with_exit_code());
}
