fn main() {
    std::process::exit(clusterx_cli::run(std::env::args_os()));
}
