fn main() -> std::process::ExitCode {
    sparse_cca::cli::main()
}
