fn main() {
    std::process::exit(qwalk_lab::cli::run(std::env::args_os()));
}
