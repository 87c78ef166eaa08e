fn main() {
    std::process::exit(stitchnet::cli::run(std::env::args_os()));
}
