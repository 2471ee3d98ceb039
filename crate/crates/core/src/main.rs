fn main() {
    let code = minimal_subshift::cli::run(std::env::args_os());
    std::process::exit(code);
}
