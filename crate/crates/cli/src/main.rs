fn main() {
    std::process::exit(spincluster_cli::run(std::env::args_os()));
}
