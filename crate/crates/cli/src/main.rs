fn main() {
    std::process::exit(cattaneo::run(std::env::args_os()));
}
