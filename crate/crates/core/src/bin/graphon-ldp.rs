fn main() {
    std::process::exit(graphon_ldp::cli::run(std::env::args_os()));
}
