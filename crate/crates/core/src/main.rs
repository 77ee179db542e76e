fn main() {
    std::process::exit(qineq::cli::run(std::env::args_os()));
}
