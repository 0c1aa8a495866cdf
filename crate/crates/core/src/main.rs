fn main() {
    std::process::exit(gbsim::cli::run(std::env::args_os()));
}
