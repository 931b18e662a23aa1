fn main() {
    std::process::exit(mpckit::cli::run(std::env::args_os()));
}
