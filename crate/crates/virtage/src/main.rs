fn main() {
    std::process::exit(virtage::cli::run_main());
}
