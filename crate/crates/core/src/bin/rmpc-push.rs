fn main() -> std::process::ExitCode {
    rmpc_push::cli::main_with_args(std::env::args_os())
}
