//! `cantor`: run a query script and print its report.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use cantor_measure::script::{self, CompiledScript, RunOptions};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "cantor", version, about = "Exact canonical measures on presented perfect trees")]
struct Args {
    /// Script file; reads standard input when absent or `-`.
    script: Option<PathBuf>,

    /// Write bound certificates to this file.
    #[arg(long, value_name = "PATH")]
    certs: Option<PathBuf>,

    /// Largest depth a query may request; also the staircase horizon.
    #[arg(long, value_name = "N", default_value_t = RunOptions::default().max_depth)]
    max_depth: usize,

    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
}

fn read_script(path: Option<&PathBuf>) -> std::io::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p),
        _ => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match read_script(args.script.as_ref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cantor: cannot read script: {e}");
            return ExitCode::from(1);
        }
    };
    let options = RunOptions { threads: args.threads, max_depth: args.max_depth };
    let compiled = match script::parse(&text).and_then(|s| CompiledScript::new(s, options)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cantor: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let report = script::run(&compiled);
    print!("{}", report.render());
    if let Some(path) = &args.certs {
        if let Err(e) = std::fs::write(path, report.certificates()) {
            eprintln!("cantor: cannot write certificates to {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
