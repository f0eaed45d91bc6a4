fn main() {
    std::process::exit(unsafe_audit::cli::run(std::env::args_os()));
}
