fn main() {
    std::process::exit(cluster_purging::cli::main_with_args(std::env::args_os()));
}
