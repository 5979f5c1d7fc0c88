fn main() {
    std::process::exit(bellnet::cli::dispatch(std::env::args_os()));
}
