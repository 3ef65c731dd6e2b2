use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use neurorule::harness::{
    evaluate, learning_curve, train_seed, EvalResult, ExperimentConfig, Workbench,
};
use neurorule::rules_io::{apply_edit, parse_rules, serialize_rules, RuleFile};
use neurorule::world::{generate_games, Difficulty, GameSpec, Split};

#[derive(Parser)]
#[command(name = "neurorule", version, about = "Learn and run lifted action rules for text cleanup games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate games and write one JSON file per game.
    Gen(GenArgs),
    /// Train rules for each seed; writes rules, prune reports and logs.
    Train(TrainArgs),
    /// Play the milestone episodes and report which action predicates matter.
    Prune(TrainArgs),
    /// Evaluate a rule file with greedy rollouts; writes JSON and CSV.
    Eval(EvalArgs),
    /// Train and evaluate at several episode budgets; writes JSON and CSV.
    Curve(CurveArgs),
    /// Inspect and edit rule files.
    #[command(subcommand)]
    Rules(RulesCommand),
}

#[derive(Subcommand)]
enum RulesCommand {
    /// Parse and validate a rule file.
    Check { file: PathBuf },
    /// Print a rule file in canonical form.
    Dump { file: PathBuf },
    /// Apply corrections to a learned rule file; edited heads replace learned ones.
    Apply {
        learned: PathBuf,
        edits: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "easy")]
    difficulty: Difficulty,
    #[arg(long, default_value = "train")]
    split: Split,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Flags that override the config file, or the defaults when none is given.
#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    difficulty: Option<Difficulty>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    noise_drop: Option<f64>,
    #[arg(long)]
    noise_swap: Option<f64>,
    /// Train with outlier rejection.
    #[arg(long = "or", overrides_with = "no_or")]
    or: bool,
    #[arg(long = "no-or")]
    no_or: bool,
    #[arg(long, overrides_with = "no_prune")]
    prune: bool,
    #[arg(long)]
    no_prune: bool,
    /// Offer negated literals to the learner.
    #[arg(long)]
    negations: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.difficulty {
            cfg.difficulty = v;
        }
        if let Some(v) = self.episodes {
            cfg.episodes = v;
            cfg.milestone = cfg.milestone.min(v.max(1));
        }
        if let Some(v) = self.seeds {
            cfg.seeds = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.noise_drop {
            cfg.noise_drop = v;
        }
        if let Some(v) = self.noise_swap {
            cfg.noise_swap = v;
        }
        if self.or {
            cfg.outlier = true;
        }
        if self.no_or {
            cfg.outlier = false;
        }
        if self.prune {
            cfg.prune = true;
        }
        if self.no_prune {
            cfg.prune = false;
        }
        if self.negations {
            cfg.negations = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    rules: PathBuf,
    /// Split to generate when no game directory is given.
    #[arg(long, default_value = "in_dist")]
    split: Split,
    /// Directory of game JSON files, as written by `gen`.
    #[arg(long)]
    games: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Ascending episode budgets.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,50")]
    budgets: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn read_rules(path: &Path) -> Result<RuleFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rules(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_games(dir: &Path) -> Result<Vec<GameSpec>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            GameSpec::from_json(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn gen(args: &GenArgs) -> Result<()> {
    let vocab = neurorule::world::EntityVocabulary::builtin();
    let games = generate_games(args.difficulty, &vocab, args.count, args.split, args.seed)?;
    create_dir(&args.out)?;
    for (i, game) in games.iter().enumerate() {
        write(&args.out.join(format!("game-{i:03}.json")), game.to_json()?)?;
    }
    println!("wrote {} games to {}", games.len(), args.out.display());
    Ok(())
}

fn train(args: &TrainArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let bench = Workbench::default();
    create_dir(&args.out)?;
    write(&args.out.join("config.toml"), cfg.to_toml_string()?)?;
    for seed in cfg.seed_list() {
        let outcome = train_seed(&cfg, &bench, seed)?;
        write(&args.out.join(format!("rules-seed{seed}.rules")), serialize_rules(&outcome.rules))?;
        if let Some(report) = &outcome.prune {
            write(&args.out.join(format!("prune-seed{seed}.json")), report.to_json()?)?;
        }
        write(
            &args.out.join(format!("log-seed{seed}.json")),
            serde_json::to_string_pretty(&outcome.log)?,
        )?;
        println!("seed {seed}:\n{}", serialize_rules(&outcome.rules));
    }
    Ok(())
}

fn prune(args: &TrainArgs) -> Result<()> {
    let mut cfg = args.config.resolve()?;
    cfg.prune = true;
    cfg.episodes = cfg.milestone;
    let bench = Workbench::default();
    create_dir(&args.out)?;
    for seed in cfg.seed_list() {
        let report = train_seed(&cfg, &bench, seed)?.prune.expect("pruning enabled");
        let pruned: Vec<String> = report.pruned().map(ToString::to_string).collect();
        println!("seed {seed}: pruned {}", pruned.join(", "));
        write(&args.out.join(format!("prune-seed{seed}.json")), report.to_json()?)?;
    }
    Ok(())
}

fn write_eval(out: &Path, stem: &str, result: &EvalResult) -> Result<()> {
    write(&out.join(format!("{stem}.json")), result.to_json()?)?;
    let file = fs::File::create(out.join(format!("{stem}.csv")))?;
    result.write_csv(file)?;
    println!(
        "{stem}: score {:.3} ± {:.3}, steps {:.1} ± {:.1}",
        result.score_mean, result.score_std, result.steps_mean, result.steps_std
    );
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let rules = read_rules(&args.rules)?;
    let bench = Workbench::default();
    let specs = match &args.games {
        Some(dir) => load_games(dir)?,
        None => bench.games(&cfg, args.split, cfg.eval_seed)?,
    };
    if specs.is_empty() {
        bail!("no games to evaluate");
    }
    let mut result = evaluate(&rules, &specs, &bench.graph, &cfg.eval_settings(), &cfg.seed_list())?;
    result.config = serde_json::to_value(&cfg)?;
    create_dir(&args.out)?;
    write_eval(&args.out, "eval", &result)
}

fn curve(args: &CurveArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let rows = learning_curve(&cfg, &Workbench::default(), &args.budgets)?;
    create_dir(&args.out)?;
    write(&args.out.join("curve.json"), serde_json::to_string_pretty(&rows)?)?;
    let mut csv = String::from("episodes,split,score_mean,score_std,steps_mean,steps_std\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.episodes, r.split, r.score_mean, r.score_std, r.steps_mean, r.steps_std
        ));
        println!("{:>5} {:<8} score {:.3} ± {:.3}", r.episodes, r.split, r.score_mean, r.score_std);
    }
    write(&args.out.join("curve.csv"), csv)
}

fn rules(cmd: &RulesCommand) -> Result<()> {
    match cmd {
        RulesCommand::Check { file } => {
            let parsed = read_rules(file)?;
            println!("{}: {} rules, ok", file.display(), parsed.rules().count());
        }
        RulesCommand::Dump { file } => print!("{}", serialize_rules(&read_rules(file)?)),
        RulesCommand::Apply { learned, edits, out } => {
            let merged = serialize_rules(&apply_edit(&read_rules(learned)?, &read_rules(edits)?)?);
            match out {
                Some(path) => write(path, merged)?,
                None => print!("{merged}"),
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Gen(a) => gen(&a),
        Command::Train(a) => train(&a),
        Command::Prune(a) => prune(&a),
        Command::Eval(a) => eval(&a),
        Command::Curve(a) => curve(&a),
        Command::Rules(c) => rules(&c),
    }
}
