fn main() {
    std::process::exit(nna::cli::run(std::env::args_os()));
}
