fn main() {
    std::process::exit(mfsir::cli::main());
}
