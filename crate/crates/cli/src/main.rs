fn main() {
    std::process::exit(npfisher_cli::run(std::env::args_os()));
}
