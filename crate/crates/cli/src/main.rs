use std::process::ExitCode;

use clap::Parser;

use cauchykit_cli::args::Cli;

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors by default; the contract here
    // is 1 for every user error.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let mut stdout = std::io::stdout().lock();
    match cauchykit_cli::run(cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
