fn main() {
    gibbsx::init_threads_from_env();
    std::process::exit(gibbsx::cli::run(std::env::args_os()));
}
