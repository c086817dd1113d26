fn main() -> std::process::ExitCode {
    plastsym::cli::main()
}
