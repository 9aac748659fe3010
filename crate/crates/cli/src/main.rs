use std::process::ExitCode;

use clap::Parser;
use zn_elliptic_cli::config::Cli;
use zn_elliptic_cli::run::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.resolve().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            println!("{}", o.summary);
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("zn-elliptic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
