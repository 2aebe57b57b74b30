fn main() -> std::process::ExitCode {
    unidive::cli::main()
}
