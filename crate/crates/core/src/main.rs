fn main() {
    std::process::exit(ramcf::cli::main());
}
