fn main() {
    std::process::exit(lightesd::cli::run(std::env::args_os()));
}
