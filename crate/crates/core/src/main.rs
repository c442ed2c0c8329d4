fn main() {
    std::process::exit(fanout_core::cli::run(std::env::args_os()));
}
