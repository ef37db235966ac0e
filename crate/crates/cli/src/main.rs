//! `bodyshape` command-line driver.

mod cli;
mod commands;
mod config;
mod data;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cli::Cli;
use commands::Ctx;
use config::RunConfig;
use error::CliResult;
use output::Output;

fn run(cli: &Cli) -> CliResult<()> {
    let config = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    let out_dir = g.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let out = Output::create(
        out_dir,
        g.quiet || config.quiet.unwrap_or(false),
        g.stamp || config.stamp.unwrap_or(false),
    )?;
    let ctx = Ctx {
        seed: g.seed.or(config.seed).unwrap_or(0),
        config,
        out,
    };
    commands::dispatch(&ctx, &cli.command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status() as u8)
        }
    }
}
