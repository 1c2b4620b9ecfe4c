fn main() {
    std::process::exit(tsbench::cli::main_impl());
}
