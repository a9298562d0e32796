fn main() {
    std::process::exit(ising_topo::cli::run(std::env::args_os()));
}
