fn main() {
    let code = fracop::cli::run_main(std::env::args_os());
    std::process::exit(code);
}
