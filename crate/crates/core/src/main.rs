fn main() {
    std::process::exit(lextrace::cli::run(std::env::args_os()));
}
