fn main() {
    let code = strongmax::cli::run(std::env::args_os());
    std::process::exit(code);
}
