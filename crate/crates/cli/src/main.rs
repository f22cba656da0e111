fn main() {
    std::process::exit(lowrank_impulse_cli::run(std::env::args_os()));
}
