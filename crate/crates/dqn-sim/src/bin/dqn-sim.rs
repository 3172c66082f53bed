fn main() {
    std::process::exit(dqn_sim::harness::cli::main());
}
