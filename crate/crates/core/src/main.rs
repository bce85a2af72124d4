fn main() {
    std::process::exit(imputekit::cli::run(std::env::args_os()));
}
