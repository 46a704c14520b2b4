use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use secrev_core::client::run_bounded;
use secrev_core::model::RawRecord;
use secrev_core::pipeline::{
    combine_and_balance, refine_entries, split_dataset, CweDescription, EmbeddingMatcher, Exemplar, Judge,
    KeywordMatcher, MatchCandidate, MergeMap, Refiner, SplitSizes, WordVectorTable, JUDGE_SLOTS, REFINE_SLOTS,
};
use secrev_core::prompt::PromptTemplate;
use secrev_core::text::StopWords;
use secrev_core::DatasetEntry;

use super::{client, keywords, output, sampling};
use crate::args::{CollectEmbedArgs, CollectKeywordArgs, CombineArgs, JudgeArgs, RefineArgs, SplitArgs};
use crate::config::RunConfig;
use crate::io::{read_records, read_text, write_records, ErrorRecord};
use crate::Outcome;

/// A candidate line; judging failures carry an `error` and are skipped
/// downstream.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CandidateLine {
    #[serde(flatten)]
    candidate: MatchCandidate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn record_map(records: Vec<RawRecord>) -> Result<HashMap<String, RawRecord>> {
    let mut map = HashMap::with_capacity(records.len());
    for r in records {
        if let Some(prev) = map.insert(r.id.clone(), r) {
            bail!("duplicate record id {}", prev.id);
        }
    }
    Ok(map)
}

fn write_candidates(config: &RunConfig, records: usize, cands: &[MatchCandidate], out: &mut dyn Write) -> Result<Outcome> {
    write_records(output(config)?, None, cands)?;
    writeln!(out, "records {records}  candidates {}", cands.len())?;
    Ok(Outcome::default())
}

pub(super) fn collect_keyword(_args: &CollectKeywordArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let records: Vec<RawRecord> = read_records(&config.inputs["input"])?;
    let cands = KeywordMatcher::new(&keywords(config)?).collect(&records);
    write_candidates(config, records.len(), &cands, out)
}

pub(super) fn collect_embed(args: &CollectEmbedArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let records: Vec<RawRecord> = read_records(&config.inputs["input"])?;
    let table = WordVectorTable::load(&args.vectors)?;
    let anchors = match &args.anchors {
        Some(p) => CweDescription::load(p)?,
        None => CweDescription::builtin(),
    };
    let stopwords = match &args.stopwords {
        Some(p) => StopWords::from_lines(&read_text(p)?),
        None => StopWords::builtin(),
    };
    let cands = EmbeddingMatcher::new(&anchors, &table, stopwords, config.threshold).collect(&records);
    write_candidates(config, records.len(), &cands, out)
}

fn prompt(path: Option<&Path>, slots: &[&str]) -> Result<Option<PromptTemplate>> {
    Ok(match path {
        Some(p) => Some(PromptTemplate::load(p, slots)?),
        None => None,
    })
}

pub(super) fn judge(args: &JudgeArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let records = record_map(read_records(&args.input)?)?;
    let cands: Vec<MatchCandidate> =
        read_records::<CandidateLine>(&args.candidates)?.into_iter().filter(|l| l.error.is_none()).map(|l| l.candidate).collect();
    let mut judge = Judge::new(client(config)?);
    if let Some(p) = prompt(args.prompt.as_deref(), &JUDGE_SLOTS)? {
        judge = judge.with_prompt(p);
    }
    judge.sampling = sampling(config);
    let results = run_bounded(&cands, config.concurrency, |c| match records.get(&c.entry_id) {
        Some(r) => judge.judge(c, r).map_err(|e| e.to_string()),
        None => Err(format!("unknown entry {}", c.entry_id)),
    });
    let mut lines = Vec::with_capacity(cands.len());
    let (mut kept, mut errors) = (0, 0);
    for (c, r) in cands.into_iter().zip(results) {
        lines.push(match r {
            Ok(v) => {
                kept += usize::from(v);
                CandidateLine { candidate: MatchCandidate { verdict: Some(v), ..c }, error: None }
            }
            Err(e) => {
                errors += 1;
                CandidateLine { candidate: c, error: Some(e) }
            }
        });
    }
    write_records(output(config)?, None, &lines)?;
    writeln!(out, "candidates {}  confirmed {kept}  errors {errors}", lines.len())?;
    Ok(Outcome { entry_errors: errors })
}

fn judged(path: &Path) -> Result<Vec<MatchCandidate>> {
    Ok(read_records::<CandidateLine>(path)?.into_iter().filter(|l| l.error.is_none()).map(|l| l.candidate).collect())
}

pub(super) fn combine(args: &CombineArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let records = record_map(read_records(&args.input)?)?;
    let kw = judged(&args.keyword_hits)?;
    let emb = match &args.embedding_hits {
        Some(p) => judged(p)?,
        None => Vec::new(),
    };
    let pool: Vec<RawRecord> = match &args.non_issue_pool {
        Some(p) => read_records(p)?,
        None => Vec::new(),
    };
    let merge = match &args.merge_map {
        Some(p) => MergeMap::load(p)?,
        None => MergeMap::builtin(),
    };
    let entries = combine_and_balance(&kw, &emb, &records, &pool, &merge, args.non_issue_count)?;
    write_records(output(config)?, None, &entries)?;
    writeln!(out, "entries {}", entries.len())?;
    Ok(Outcome::default())
}

pub(super) fn refine(args: &RefineArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let entries: Vec<DatasetEntry> = read_records(&args.input)?;
    let mut refiner = Refiner::new(client(config)?);
    if let Some(p) = prompt(args.prompt.as_deref(), &REFINE_SLOTS)? {
        refiner = refiner.with_prompt(p);
    }
    if let Some(p) = &args.exemplar {
        refiner = refiner.with_exemplar(Exemplar::load(p)?);
    }
    refiner.sampling = sampling(config);
    let results = refine_entries(&entries, &refiner, config.concurrency);
    let mut lines: Vec<Value> = Vec::with_capacity(entries.len());
    let mut errors = 0;
    for (e, r) in entries.iter().zip(results) {
        lines.push(match r {
            Ok(refined) => serde_json::to_value(refined)?,
            Err(err) => {
                errors += 1;
                serde_json::to_value(ErrorRecord { id: &e.id, error: err.to_string() })?
            }
        });
    }
    write_records(output(config)?, None, &lines)?;
    writeln!(out, "entries {}  refined {}  errors {errors}", lines.len(), lines.len() - errors)?;
    Ok(Outcome { entry_errors: errors })
}

pub(super) fn split(args: &SplitArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let entries: Vec<DatasetEntry> = read_records(&args.input)?;
    let sizes = SplitSizes::new(args.train, args.valid, args.test);
    let (split, header) = split_dataset(entries, sizes, config.seed)?;
    write_records(output(config)?, Some(&serde_json::to_value(&header)?), &split)?;
    writeln!(out, "entries {}  train {}  valid {}  test {}  seed {}", split.len(), args.train, args.valid, args.test, config.seed)?;
    Ok(Outcome::default())
}
