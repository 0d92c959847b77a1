fn main() -> std::process::ExitCode {
    kuranet::cli::main()
}
