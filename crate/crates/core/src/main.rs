fn main() {
    std::process::exit(mbl_otto::cli::main());
}
