use clap::Parser;

use bigan_anomaly::cli::{self, Cli, CliError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are success, everything else is a usage error
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(err) = cli::run(cli) {
        let kind = match err {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Runtime(_) => "runtime",
        };
        eprintln!("error ({kind}): {}", err.message());
        std::process::exit(err.exit_code());
    }
}
