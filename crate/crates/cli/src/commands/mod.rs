use std::path::PathBuf;

use crate::cli::Command;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

mod classify;
mod cluster;
mod eval;
mod gen;
mod measure;
mod models;
mod train;

pub struct Ctx {
    pub seed: u64,
    pub config: RunConfig,
    pub out: Output,
}

impl Ctx {
    /// The flag value, else the config value resolved against `data_dir`.
    pub fn path(&self, flag: &Option<PathBuf>, config: &Option<PathBuf>, flag_name: &str) -> CliResult<PathBuf> {
        self.optional_path(flag, config)
            .ok_or_else(|| CliError::usage(format!("missing --{flag_name}")))
    }

    pub fn optional_path(&self, flag: &Option<PathBuf>, config: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| config.as_ref().map(|p| self.config.data_path(p)))
    }
}

pub fn dispatch(ctx: &Ctx, command: &Command) -> CliResult<()> {
    match command {
        Command::Gen(a) => gen::run(ctx, a),
        Command::Measure(a) => measure::run(ctx, a),
        Command::Classify(a) => classify::run(ctx, a),
        Command::Train(a) => train::run(ctx, a),
        Command::Cluster(a) => cluster::run(ctx, a),
        Command::Eval(a) => eval::run(ctx, a),
    }
}
