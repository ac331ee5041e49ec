use clap::Parser;
use zampling_cli::args::Cli;
use zampling_cli::error::ExitKind;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout and succeed; malformed
            // arguments are configuration errors.
            let _ = e.print();
            std::process::exit(if e.use_stderr() { ExitKind::Config as i32 } else { 0 });
        }
    };
    match zampling_cli::run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("zample {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
