use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use secrev_core::client::Sampling;

#[derive(Debug, Parser)]
#[command(name = "secrev", version, about = "Security code review toolkit: dataset pipeline, retrieval-augmented review, SecureBLEU evaluation")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound on simultaneous model calls.
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    /// TOML file with default settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit without doing any work.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions against references: BLEU-4, SecureBLEU, detection metrics.
    Eval(EvalArgs),
    /// Propose candidates by keyword matching over reviewer comments.
    CollectKeyword(CollectKeywordArgs),
    /// Propose candidates by embedding similarity to CWE descriptions.
    CollectEmbed(CollectEmbedArgs),
    /// Ask a model to confirm or reject each candidate.
    Judge(JudgeArgs),
    /// Deduplicate judged candidates and add Non-Issue samples.
    Combine(CombineArgs),
    /// Rewrite raw comments into structured reviews.
    Refine(RefineArgs),
    /// Assign stratified train/valid/test splits.
    Split(SplitArgs),
    /// Validate a template file and summarize its per-type index.
    BuildStore(BuildStoreArgs),
    /// Rank templates of a security type for each diff.
    Retrieve(RetrieveArgs),
    /// Generate reviews with two-stage retrieval-augmented prompting.
    Review(ReviewArgs),
    /// Export per-token weight masks for training.
    Mask(MaskArgs),
    /// Correlate SecureBLEU with human scores across lambda values.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::CollectKeyword(_) => "collect-keyword",
            Command::CollectEmbed(_) => "collect-embed",
            Command::Judge(_) => "judge",
            Command::Combine(_) => "combine",
            Command::Refine(_) => "refine",
            Command::Split(_) => "split",
            Command::BuildStore(_) => "build-store",
            Command::Retrieve(_) => "retrieve",
            Command::Review(_) => "review",
            Command::Mask(_) => "mask",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Greedy,
    Baseline,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Greedy => Sampling::Greedy,
            SamplingArg::Baseline => Sampling::Baseline,
        }
    }
}

#[derive(Debug, Args)]
pub struct EndpointArgs {
    /// Base URL of a chat-completions endpoint; the key is read from SECREV_API_KEY.
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingArg>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predictions: JSONL with `id` and `comment` (or `final_comment`, or `review` text).
    #[arg(long)]
    pub pred: PathBuf,
    /// References: dataset JSONL.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    /// SecureBLEU weights JSON.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Report file (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollectKeywordArgs {
    /// Raw records JSONL (`id`, `diff`/`patch`, `comment_raw`/`msg`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CollectEmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Word vectors in word2vec text format.
    #[arg(long)]
    pub vectors: PathBuf,
    /// CWE anchor JSON; defaults to the bundled file.
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    /// Raw records the candidates refer to.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub prompt: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub keyword_hits: PathBuf,
    #[arg(long)]
    pub embedding_hits: Option<PathBuf>,
    /// Raw records eligible as Non-Issue samples.
    #[arg(long)]
    pub non_issue_pool: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub non_issue_count: usize,
    #[arg(long)]
    pub merge_map: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// Dataset JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub exemplar: Option<PathBuf>,
    #[arg(long)]
    pub prompt: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub train: usize,
    #[arg(long)]
    pub valid: usize,
    #[arg(long)]
    pub test: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildStoreArgs {
    /// Template JSONL (`id`, `security_type`, `diff`, `comment`).
    #[arg(long)]
    pub templates: PathBuf,
    /// Summary JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[arg(long)]
    pub templates: PathBuf,
    /// Records with `id`, `diff` and optionally `security_type`.
    #[arg(long)]
    pub input: PathBuf,
    /// Security type for every query, overriding per-record types.
    #[arg(long = "type")]
    pub security_type: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReviewArgs {
    #[arg(long)]
    pub templates: PathBuf,
    /// Records with `id` and `diff`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub initial_prompt: Option<PathBuf>,
    #[arg(long)]
    pub final_prompt: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Dataset JSONL with structured comments.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Human scores JSONL (`id`, `score`).
    #[arg(long)]
    pub human: PathBuf,
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Comma-separated lambda values; defaults to 0.2 through 0.8 by 0.1.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
