use std::collections::BTreeMap;
use std::io::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use secrev_core::client::run_bounded;
use secrev_core::prompt::PromptTemplate;
use secrev_core::rarg::{Rarg, RargTrace, FINAL_SLOTS, INITIAL_SLOTS};
use secrev_core::retrieval::TemplateStore;
use secrev_core::{CodeDiff, SecurityType};

use super::{client, output, sampling};
use crate::args::{BuildStoreArgs, RetrieveArgs, ReviewArgs};
use crate::config::RunConfig;
use crate::io::{read_records, write_json, write_records, ErrorRecord};
use crate::Outcome;

/// A diff to review or query with. Dataset entries qualify.
#[derive(Debug, Deserialize)]
struct Query {
    id: String,
    #[serde(alias = "patch")]
    diff: String,
    #[serde(default)]
    lang: Option<String>,
    #[serde(default)]
    security_type: Option<SecurityType>,
}

impl Query {
    fn code_diff(&self) -> Result<CodeDiff, String> {
        let d = CodeDiff::new(self.diff.clone()).map_err(|e| e.to_string())?;
        Ok(match &self.lang {
            Some(l) => d.with_language(l.clone()),
            None => d,
        })
    }
}

pub(super) fn build_store(_args: &BuildStoreArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let store = TemplateStore::load(&config.inputs["templates"])?;
    let per_type: BTreeMap<String, usize> =
        store.per_type_index().into_iter().map(|(t, ids)| (t.display_name().to_string(), ids.len())).collect();
    let params = store.params();
    let summary = json!({
        "templates": store.len(),
        "params": {"k1": params.k1, "b": params.b},
        "per_type": per_type,
    });
    if let Some(path) = &config.output {
        write_json(path, &summary)?;
    }
    writeln!(out, "templates {}", store.len())?;
    for (t, n) in &per_type {
        writeln!(out, "  {t}: {n}")?;
    }
    Ok(Outcome::default())
}

#[derive(Serialize)]
struct Hit<'a> {
    template_id: &'a str,
    score: f64,
}

pub(super) fn retrieve(args: &RetrieveArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let store = TemplateStore::load(&args.templates)?;
    let forced: Option<SecurityType> = args.security_type.as_deref().map(str::parse).transpose()?;
    let queries: Vec<Query> = read_records(&args.input)?;
    let mut lines: Vec<Value> = Vec::with_capacity(queries.len());
    let mut errors = 0;
    for q in &queries {
        let line = forced
            .or(q.security_type)
            .ok_or_else(|| "no security type for query".to_string())
            .and_then(|ty| {
                let diff = q.code_diff()?;
                let hits = store.retrieve(&diff, ty, args.k).map_err(|e| e.to_string())?;
                let hits: Vec<Hit> = hits.iter().map(|h| Hit { template_id: &h.template.id, score: h.score }).collect();
                Ok(json!({"id": q.id, "security_type": ty, "hits": hits}))
            });
        lines.push(match line {
            Ok(v) => v,
            Err(error) => {
                errors += 1;
                serde_json::to_value(ErrorRecord { id: &q.id, error })?
            }
        });
    }
    write_records(output(config)?, None, &lines)?;
    writeln!(out, "queries {}  errors {errors}", lines.len())?;
    Ok(Outcome { entry_errors: errors })
}

#[derive(Serialize)]
struct TraceLine<'a> {
    id: &'a str,
    #[serde(flatten)]
    trace: RargTrace,
}

pub(super) fn review(args: &ReviewArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let store = TemplateStore::load(&args.templates)?;
    let queries: Vec<Query> = read_records(&args.input)?;
    let mut rarg = Rarg::new(client(config)?);
    match (&args.initial_prompt, &args.final_prompt) {
        (Some(i), Some(f)) => {
            rarg = rarg.with_prompts(PromptTemplate::load(i, &INITIAL_SLOTS)?, PromptTemplate::load(f, &FINAL_SLOTS)?);
        }
        (None, None) => {}
        _ => bail!("--initial-prompt and --final-prompt must be given together"),
    }
    rarg.sampling = sampling(config);
    let results = run_bounded(&queries, config.concurrency, |q| {
        let diff = q.code_diff()?;
        rarg.review(&diff, &store).map_err(|e| e.to_string())
    });
    let mut lines: Vec<Value> = Vec::with_capacity(queries.len());
    let mut errors = 0;
    for (q, r) in queries.iter().zip(results) {
        lines.push(match r {
            Ok(trace) => serde_json::to_value(TraceLine { id: &q.id, trace })?,
            Err(error) => {
                errors += 1;
                serde_json::to_value(ErrorRecord { id: &q.id, error })?
            }
        });
    }
    write_records(output(config)?, None, &lines)?;
    writeln!(out, "reviews {}  errors {errors}", lines.len() - errors)?;
    Ok(Outcome { entry_errors: errors })
}
