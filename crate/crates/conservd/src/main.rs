fn main() {
    std::process::exit(conservd::cli::run());
}
