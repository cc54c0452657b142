fn main() -> std::process::ExitCode {
    apdg_harness::cli::main()
}
