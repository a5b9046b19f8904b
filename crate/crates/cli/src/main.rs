fn main() {
    std::process::exit(illumaug_cli::run(std::env::args_os()));
}
