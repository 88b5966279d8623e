fn main() {
    std::process::exit(fbh::run(std::env::args_os()));
}
