mod dataset;
mod eval;
mod generate;
mod training;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use secrev_core::client::{BoundedClient, HttpChatClient, API_KEY_ENV};
use secrev_core::metrics::FieldWeights;
use secrev_core::KeywordDictionary;

use crate::args::{Cli, Command, EndpointArgs};
use crate::config::*;
use crate::Outcome;

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<Outcome> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let config = resolve(&cli, &file);
    config.validate()?;
    if cli.dry_run {
        writeln!(out, "{}", serde_json::to_string_pretty(&config)?)?;
        return Ok(Outcome::default());
    }
    match &cli.command {
        Command::Eval(a) => eval::run(a, &config, out),
        Command::CollectKeyword(a) => dataset::collect_keyword(a, &config, out),
        Command::CollectEmbed(a) => dataset::collect_embed(a, &config, out),
        Command::Judge(a) => dataset::judge(a, &config, out),
        Command::Combine(a) => dataset::combine(a, &config, out),
        Command::Refine(a) => dataset::refine(a, &config, out),
        Command::Split(a) => dataset::split(a, &config, out),
        Command::BuildStore(a) => generate::build_store(a, &config, out),
        Command::Retrieve(a) => generate::retrieve(a, &config, out),
        Command::Review(a) => generate::review(a, &config, out),
        Command::Mask(a) => training::mask(a, &config, out),
        Command::Sweep(a) => training::sweep(a, &config, out),
    }
}

fn endpoint_settings(args: &EndpointArgs, file: &FileConfig) -> EndpointSettings {
    EndpointSettings {
        base_url: args.base_url.clone().or_else(|| file.base_url.clone()),
        model: args.model.clone().or_else(|| file.model.clone()).unwrap_or_else(|| "default".into()),
        max_retries: args.max_retries.or(file.max_retries).unwrap_or(DEFAULT_MAX_RETRIES),
        sampling: args.sampling.map(Into::into).or(file.sampling).unwrap_or_default(),
    }
}

fn resolve(cli: &Cli, file: &FileConfig) -> RunConfig {
    let mut c = RunConfig {
        command: cli.command.name().to_string(),
        inputs: BTreeMap::new(),
        output: None,
        keywords: file.keywords.clone(),
        weights: file.weights.clone(),
        threshold: file.threshold.unwrap_or(DEFAULT_THRESHOLD),
        alpha: file.alpha.unwrap_or(DEFAULT_ALPHA),
        beta: file.beta.unwrap_or(DEFAULT_BETA),
        lambda: file.lambda.unwrap_or(DEFAULT_LAMBDA),
        concurrency: cli.concurrency.or(file.concurrency).unwrap_or(DEFAULT_CONCURRENCY),
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        endpoint: None,
    };
    let mut input = |name: &str, p: &Path| {
        c.inputs.insert(name.to_string(), p.to_path_buf());
    };
    let mut opt_inputs: Vec<(&str, &Option<PathBuf>)> = Vec::new();
    match &cli.command {
        Command::Eval(a) => {
            input("pred", &a.pred);
            input("ref", &a.reference);
            override_path(&mut c.keywords, &a.keywords);
            override_path(&mut c.weights, &a.weights);
            if let Some(l) = a.lambda {
                c.lambda = l;
            }
            c.output = a.out.clone();
        }
        Command::CollectKeyword(a) => {
            input("input", &a.input);
            override_path(&mut c.keywords, &a.keywords);
            c.output = Some(a.out.clone());
        }
        Command::CollectEmbed(a) => {
            input("input", &a.input);
            input("vectors", &a.vectors);
            opt_inputs.extend([("anchors", &a.anchors), ("stopwords", &a.stopwords)]);
            if let Some(t) = a.threshold {
                c.threshold = t;
            }
            c.output = Some(a.out.clone());
        }
        Command::Judge(a) => {
            input("input", &a.input);
            input("candidates", &a.candidates);
            opt_inputs.push(("prompt", &a.prompt));
            c.endpoint = Some(endpoint_settings(&a.endpoint, file));
            c.output = Some(a.out.clone());
        }
        Command::Combine(a) => {
            input("input", &a.input);
            input("keyword_hits", &a.keyword_hits);
            opt_inputs.extend([
                ("embedding_hits", &a.embedding_hits),
                ("non_issue_pool", &a.non_issue_pool),
                ("merge_map", &a.merge_map),
            ]);
            c.output = Some(a.out.clone());
        }
        Command::Refine(a) => {
            input("input", &a.input);
            opt_inputs.extend([("exemplar", &a.exemplar), ("prompt", &a.prompt)]);
            c.endpoint = Some(endpoint_settings(&a.endpoint, file));
            c.output = Some(a.out.clone());
        }
        Command::Split(a) => {
            input("input", &a.input);
            c.output = Some(a.out.clone());
        }
        Command::BuildStore(a) => {
            input("templates", &a.templates);
            c.output = a.out.clone();
        }
        Command::Retrieve(a) => {
            input("templates", &a.templates);
            input("input", &a.input);
            c.output = Some(a.out.clone());
        }
        Command::Review(a) => {
            input("templates", &a.templates);
            input("input", &a.input);
            opt_inputs.extend([("initial_prompt", &a.initial_prompt), ("final_prompt", &a.final_prompt)]);
            c.endpoint = Some(endpoint_settings(&a.endpoint, file));
            c.output = Some(a.out.clone());
        }
        Command::Mask(a) => {
            input("input", &a.input);
            if let Some(v) = a.alpha {
                c.alpha = v;
            }
            if let Some(v) = a.beta {
                c.beta = v;
            }
            c.output = Some(a.out.clone());
        }
        Command::Sweep(a) => {
            input("pred", &a.pred);
            input("ref", &a.reference);
            input("human", &a.human);
            override_path(&mut c.keywords, &a.keywords);
            override_path(&mut c.weights, &a.weights);
            c.output = a.out.clone();
        }
    }
    for (name, p) in opt_inputs {
        if let Some(p) = p {
            c.inputs.insert(name.to_string(), p.clone());
        }
    }
    c
}

fn override_path(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if flag.is_some() {
        slot.clone_from(flag);
    }
}

fn keywords(config: &RunConfig) -> Result<KeywordDictionary> {
    match &config.keywords {
        Some(p) => KeywordDictionary::load(p).with_context(|| format!("loading keywords {}", p.display())),
        None => Ok(KeywordDictionary::builtin()),
    }
}

fn weights(config: &RunConfig) -> Result<FieldWeights> {
    let w = match &config.weights {
        Some(p) => FieldWeights::load(p).with_context(|| format!("loading weights {}", p.display()))?,
        None => FieldWeights::default(),
    };
    Ok(w.with_lambda(config.lambda)?)
}

fn client(config: &RunConfig) -> Result<BoundedClient<HttpChatClient>> {
    let settings = config.endpoint.as_ref().context("command has no endpoint settings")?;
    let endpoint = settings.endpoint()?;
    if endpoint.api_key.is_none() {
        bail!("{API_KEY_ENV} is not set");
    }
    Ok(BoundedClient::new(HttpChatClient::new(endpoint), config.concurrency))
}

fn output(config: &RunConfig) -> Result<&Path> {
    config.output.as_deref().context("no output path")
}

fn sampling(config: &RunConfig) -> secrev_core::client::Sampling {
    config.endpoint.as_ref().map(|e| e.sampling).unwrap_or_default()
}
