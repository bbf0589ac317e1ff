fn main() {
    std::process::exit(qos_energy::cli::run(std::env::args_os()));
}
