fn main() {
    std::process::exit(qregress::cli::run(std::env::args_os()));
}
