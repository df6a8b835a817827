fn main() -> std::process::ExitCode {
    klamp::cli::main()
}
