use std::process::ExitCode;

fn main() -> ExitCode {
    qcdma::cli::main_entry()
}
