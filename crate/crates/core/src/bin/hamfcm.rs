fn main() {
    std::process::exit(hamfcm_core::cli::main());
}
