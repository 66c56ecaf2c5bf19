fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LVEF_LOG", "warn")).init();
    std::process::exit(lvef_core::cli::run(std::env::args_os()));
}
