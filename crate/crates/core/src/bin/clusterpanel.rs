fn main() -> std::process::ExitCode {
    clusterpanel::cli::main()
}
