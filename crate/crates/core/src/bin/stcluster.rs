fn main() {
    std::process::exit(stcluster::cli::run(std::env::args_os()));
}
