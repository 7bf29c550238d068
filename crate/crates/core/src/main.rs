fn main() -> std::process::ExitCode {
    sylvester_core::cli::main()
}
