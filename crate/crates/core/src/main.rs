fn main() {
    std::process::exit(qclab::cli::main());
}
