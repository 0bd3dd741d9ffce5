fn main() {
    std::process::exit(stepforce_cli::run(std::env::args_os()));
}
