fn main() {
    env_logger::init();
    std::process::exit(sgek::cli::run(std::env::args_os()));
}
