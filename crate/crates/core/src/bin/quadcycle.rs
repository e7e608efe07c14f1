fn main() {
    std::process::exit(quadcycle::cli::dispatch(std::env::args_os()));
}
