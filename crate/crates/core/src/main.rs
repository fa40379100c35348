fn main() {
    std::process::exit(cavex::cli::run(std::env::args_os()));
}
