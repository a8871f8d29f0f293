use std::path::{Path, PathBuf};

use serde_json::json;

use super::{evaluated, load_results};
use crate::commands::administer::render;
use crate::config::Effective;
use crate::output::emit;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Result files written by `administer --results`.
    #[arg(required = true, value_name = "RESULTS")]
    pub results: Vec<PathBuf>,
}

pub fn run(args: &Args, config: &Effective, out: Option<&Path>) -> anyhow::Result<()> {
    let docs = load_results(&args.results)?;
    emit(out, &render(&evaluated(&docs), json!({}), config)?)
}
