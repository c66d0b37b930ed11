use clap::Parser;
use pensionlab_cli::{run, Cli, Outcome};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Config(json)) => println!("{json}"),
        Ok(Outcome::Ran(report)) => {
            for line in &report.summary {
                println!("{line}");
            }
            for file in &report.files {
                eprintln!("wrote {}", file.display());
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
