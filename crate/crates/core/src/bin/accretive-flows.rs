fn main() {
    std::process::exit(accretive_flows::cli::parse_and_run(std::env::args_os()));
}
