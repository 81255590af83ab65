fn main() {
    std::process::exit(tls_fewcycle::cli::run(std::env::args_os()));
}
