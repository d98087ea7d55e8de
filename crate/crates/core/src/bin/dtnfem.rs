fn main() {
    std::process::exit(dtnfem::harness::cli::cli_main(std::env::args_os()));
}
