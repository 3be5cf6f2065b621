use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod config;
mod manifest;
mod stages;

#[derive(Parser, Debug)]
#[command(name = "psysym", version, about = "Symptom identification and disease detection pipeline")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Checks the knowledge graph and reports its shape.
    ValidateKg,
    /// Embeds every sub-symptom description.
    Embed,
    /// Selects annotation candidates for one disease.
    Retrieve {
        #[arg(long)]
        disease: String,
    },
    /// Removes near-duplicate candidates of one disease.
    Dedup {
        #[arg(long)]
        disease: String,
    },
    /// Labels diagnosed users and samples controls.
    LabelUsers,
    /// Merges annotator records into gold labels.
    MergeAnnotations,
    TrainRelevance,
    TrainStatus,
    TrainMdd,
    /// Scores a trained stage on its test split.
    Evaluate {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Writes symptom-grounded explanations.
    Explain {
        #[arg(long)]
        user: Option<String>,
        #[arg(long)]
        disease: Option<String>,
    },
    /// Flags labels that disagree with symptom coverage.
    Audit,
    /// Writes a seeded synthetic corpus and a matching config.
    SynthFixtures {
        #[arg(long, default_value_t = 20)]
        users_per_disease: usize,
        #[arg(long, default_value_t = 80)]
        controls: usize,
        #[arg(long, default_value_t = 2000)]
        sentences: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Relevance,
    Status,
    Mdd,
    All,
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::ValidateKg => "validate-kg",
            Command::Embed => "embed",
            Command::Retrieve { .. } => "retrieve",
            Command::Dedup { .. } => "dedup",
            Command::LabelUsers => "label-users",
            Command::MergeAnnotations => "merge-annotations",
            Command::TrainRelevance => "train-relevance",
            Command::TrainStatus => "train-status",
            Command::TrainMdd => "train-mdd",
            Command::Evaluate { .. } => "evaluate",
            Command::Explain { .. } => "explain",
            Command::Audit => "audit",
            Command::SynthFixtures { .. } => "synth-fixtures",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Command::SynthFixtures {
        users_per_disease,
        controls,
        sentences,
    } = cli.command
    {
        let out = cli
            .out
            .ok_or_else(|| stages::CliError::usage("synth-fixtures requires --out"))?;
        let sizes = stages::FixtureSizes {
            users_per_disease,
            controls,
            sentences,
        };
        return stages::synth_fixtures(&out, cli.seed.unwrap_or(0), &sizes);
    }
    let path = cli
        .config
        .ok_or_else(|| stages::CliError::usage("--config is required"))?;
    let ctx = stages::Ctx::load(&path, cli.seed, cli.out).map_err(stages::CliError::config)?;
    match cli.command {
        Command::ValidateKg => stages::validate_kg(&ctx),
        Command::Embed => stages::embed(&ctx),
        Command::Retrieve { disease } => stages::retrieve(&ctx, &disease),
        Command::Dedup { disease } => stages::dedup(&ctx, &disease),
        Command::LabelUsers => stages::label_users(&ctx),
        Command::MergeAnnotations => stages::merge_annotations(&ctx),
        Command::TrainRelevance => stages::train_relevance(&ctx),
        Command::TrainStatus => stages::train_status(&ctx),
        Command::TrainMdd => stages::train_mdd(&ctx),
        Command::Evaluate { suite } => stages::evaluate(&ctx, suite),
        Command::Explain { user, disease } => stages::explain(&ctx, user.as_deref(), disease.as_deref()),
        Command::Audit => stages::audit(&ctx),
        Command::SynthFixtures { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stage = cli.command.stage();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", stages::error_json(stage, &err));
            ExitCode::FAILURE
        }
    }
}
