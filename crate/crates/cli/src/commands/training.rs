use std::collections::HashMap;
use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use secrev_core::metrics::{best_row, default_lambdas, weight_sweep, SweepRow};
use secrev_core::sa_loss::{export_masks, masks_to_jsonl};
use secrev_core::DatasetEntry;

use super::eval::{evaluate, load_pairs};
use super::{keywords, output, weights};
use crate::args::{MaskArgs, SweepArgs};
use crate::config::RunConfig;
use crate::io::{read_records, write_json};
use crate::Outcome;

pub(super) fn mask(_args: &MaskArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let entries: Vec<DatasetEntry> = read_records(&config.inputs["input"])?;
    let records = export_masks(&entries, config.alpha, config.beta)?;
    let text = masks_to_jsonl(&records, config.alpha, config.beta)?;
    let path = output(config)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    let errors = records.iter().filter(|r| r.is_error()).count();
    writeln!(out, "masks {} (errors {}) alpha {} beta {}", records.len() - errors, errors, config.alpha, config.beta)?;
    Ok(Outcome { entry_errors: errors })
}

#[derive(Debug, Deserialize)]
struct HumanScore {
    id: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    pairs: usize,
    rows: Vec<SweepRow>,
    best: Option<SweepRow>,
}

/// Correlates SecureBLEU with human scores over the generation pairs that
/// have a human score.
pub(super) fn sweep(args: &SweepArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let (preds, refs) = load_pairs(&args.pred, &args.reference)?;
    let human: Vec<HumanScore> = read_records(&args.human)?;
    let mut scores = HashMap::new();
    for h in human {
        if scores.insert(h.id.clone(), h.score).is_some() {
            bail!("duplicate human score for {}", h.id);
        }
    }
    let report = evaluate(&preds, &refs, &keywords(config)?, &weights(config)?)?;
    let (mut reports, mut xs) = (Vec::new(), Vec::new());
    for p in &report.per_pair {
        if let (Some(s), Some(h)) = (&p.secure_bleu, scores.get(&p.id)) {
            reports.push(s.clone());
            xs.push(*h);
        }
    }
    let lambdas = args.lambdas.clone().unwrap_or_else(default_lambdas);
    let rows = weight_sweep(&reports, &xs, &lambdas)?;
    let result = SweepReport { pairs: reports.len(), best: best_row(&rows), rows };
    if let Some(path) = &config.output {
        write_json(path, &result)?;
    }
    writeln!(out, "pairs {}", result.pairs)?;
    for row in &result.rows {
        writeln!(out, "lambda {:.2}  r {:.4}", row.lambda, row.r)?;
    }
    if let Some(b) = result.best {
        writeln!(out, "best lambda {:.2} (r {:.4})", b.lambda, b.r)?;
    }
    Ok(Outcome { entry_errors: report.entry_errors })
}
