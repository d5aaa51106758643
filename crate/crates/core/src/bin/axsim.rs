fn main() {
    std::process::exit(axsim::cli::run_from_args());
}
