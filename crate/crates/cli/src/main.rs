use std::process::ExitCode;

use kerr_dimer_cli::{parse_config, run, CliError};

fn main() -> ExitCode {
    let code = match parse_config(std::env::args_os()) {
        Ok(config) => {
            if let Some(n) = config.threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not size the worker pool: {e}");
                }
            }
            match run(&config) {
                Ok(report) => {
                    for w in &report.warnings {
                        eprintln!("warning: {w}");
                    }
                    for f in &report.failures {
                        eprintln!("error: {f}");
                    }
                    for path in &report.files {
                        println!("{}", path.display());
                    }
                    report.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(CliError::Info(text)) => {
            print!("{text}");
            0
        }
        Err(CliError::Usage(text)) => {
            eprint!("{text}");
            if !text.ends_with('\n') {
                eprintln!();
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
