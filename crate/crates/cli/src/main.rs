fn main() {
    std::process::exit(derivgraph_cli::run_cli(std::env::args_os()));
}
