fn main() {
    std::process::exit(pnlink::cli::run(std::env::args_os()));
}
