fn main() {
    std::process::exit(orbitset::cli::run(std::env::args_os()));
}
