use std::process::ExitCode;

fn main() -> ExitCode {
    let config = match rtdevs_host::cli::parse_args(std::env::args_os()) {
        Ok(config) => config,
        Err(e) => e.exit(),
    };
    ExitCode::from(rtdevs_host::cli::run(&config) as u8)
}
