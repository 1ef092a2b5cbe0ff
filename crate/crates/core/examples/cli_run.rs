//! Drives the command-line layer in-process and re-validates what it writes.

use nhse::cli::{run_to_string, validate_output, CommandKind, OutputFormat, RangeArg, RunConfig};

pub fn run() -> nhse::Result<()> {
    let mut config = RunConfig::new(CommandKind::Solve);
    config.psi0 = RangeArg::single(1.0);
    config.n = Some(3);
    config.omega = "0:3".parse().map_err(nhse::Error::Config)?;
    config.output_format = Some(OutputFormat::Csv);
    let text = run_to_string(&config)?;
    print!("{text}");
    validate_output(&text)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
