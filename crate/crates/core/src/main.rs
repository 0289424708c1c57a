use std::process::ExitCode;

use clap::Parser;
use clusterhop::cli::{run, Cli, RunManifest};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let manifest = RunManifest::from(Cli::parse());
    match run(&manifest) {
        Ok(out) => {
            println!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error class={} message={}", e.class(), message);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
