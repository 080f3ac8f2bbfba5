use clap::Parser;
use noma_oqc_harness::{run_cli, Cli};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let manifest = run_cli(&cli)?;
    eprintln!("wrote {}", manifest.display());
    Ok(())
}
