//! Command-line surface: train models, run generation experiments, build
//! stationary-distribution oracles, compare chains against them, tabulate
//! perplexities, sweep noise, and render SVGs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use planchette_core::dynamics::t_fused;
use planchette_core::energy::EnergyContext;
use planchette_core::lm::CharModel;
use planchette_core::oracle::{
    char_mass_oracle, empirical_histogram, gibbs_oracle, total_variation, Grid,
};
use planchette_core::{BoardLayout, Position, Symbol};

use planchette_cli::config::ExperimentConfig;
use planchette_cli::experiment::{
    ablation_sweep, perplexity_matrix, weight_density, Condition, Experiment,
};
use planchette_cli::{export, svg};

#[derive(Parser)]
#[command(name = "planchette", version, about = "Collective Langevin character sampler")]
struct Cli {
    /// JSON experiment configuration; defaults apply for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the per-agent n-gram models and write them as JSON.
    Train,
    /// Run generation trials and write frequency tables, generation records,
    /// weight densities, and sample trajectories.
    Generate(GenerateArgs),
    /// Discretize the fused Gibbs field for a context and integrate
    /// per-symbol masses.
    Oracle(OracleArgs),
    /// Compare an empirical position histogram against the Gibbs oracle.
    Compare(CompareArgs),
    /// Evaluate every condition's valid generations under every model.
    Perplexity,
    /// Rerun the collective condition across noise temperatures.
    Ablate(AblateArgs),
    /// Render a field or trajectory CSV as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// `all`, `collective`, or `agent<k>`.
    #[arg(long, default_value = "all")]
    condition: String,

    /// Override the configured trial count.
    #[arg(long)]
    trials: Option<usize>,

    /// Dump full per-character trajectories for this many leading trials.
    #[arg(long, default_value_t = 1)]
    dump_trajectories: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// Context letters the next character is conditioned on.
    #[arg(long, default_value = "")]
    context: String,

    #[arg(long, default_value_t = 0.02)]
    grid_step: f64,

    /// Defaults to the fused temperature `sum(D_i) / eta`.
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value = "")]
    context: String,

    #[arg(long, default_value_t = 200_000)]
    steps: usize,

    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,

    #[arg(long, default_value_t = 0.1)]
    grid_step: f64,
}

#[derive(Args)]
struct AblateArgs {
    /// Comma-separated per-agent temperatures.
    #[arg(long, default_value = "0,0.2,0.5,1.0", value_delimiter = ',')]
    temperatures: Vec<f64>,
}

#[derive(Args)]
struct RenderArgs {
    /// A field CSV (`x,y,...`) or trajectory CSV (`t,x,y,...`).
    #[arg(long)]
    input: PathBuf,

    /// Defaults to the input path with an `.svg` extension.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum CliError {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn main() {
    let code = match run() {
        Ok(()) => 0,
        Err(CliError::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            1
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            e.print().ok();
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(anyhow!(e.to_string()))),
    };

    let mut config = load_config(cli.config.as_deref()).map_err(CliError::Config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Command::Generate(args) = &cli.command {
        if let Some(trials) = args.trials {
            config.trials = trials;
        }
    }
    let experiment = Experiment::from_config(&config).map_err(CliError::Config)?;
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))
        .map_err(CliError::Config)?;

    match &cli.command {
        Command::Train => cmd_train(&experiment, &cli.out),
        Command::Generate(args) => cmd_generate(&experiment, args, &cli.out),
        Command::Oracle(args) => cmd_oracle(&experiment, args, &cli.out),
        Command::Compare(args) => cmd_compare(&experiment, args, &cli.out),
        Command::Perplexity => cmd_perplexity(&experiment, &cli.out),
        Command::Ablate(args) => cmd_ablate(&experiment, args, &cli.out),
        Command::Render(args) => cmd_render(&experiment, args, &cli.out),
    }
    .map_err(CliError::Runtime)
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::from_json(&text)
                .with_context(|| format!("parsing config {}", path.display()))
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_context(experiment: &Experiment, letters: &str) -> Result<Vec<Symbol>> {
    Ok(experiment.board.alphabet().encode_word(letters)?)
}

fn context_dists(experiment: &Experiment, context: &[Symbol]) -> Vec<Vec<f64>> {
    experiment.agents.iter().map(|a| a.model.next_char_dist(context)).collect()
}

fn cmd_train(experiment: &Experiment, out: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct TrainReport {
        agents: Vec<AgentReport>,
    }
    #[derive(Serialize)]
    struct AgentReport {
        name: String,
        scheme: String,
        noise_d: f64,
        temperature: f64,
        model_file: String,
        corpus_file: String,
    }

    let mut agents = Vec::new();
    for (i, (agent, scheme)) in
        experiment.agents.iter().zip(&experiment.schemes).enumerate()
    {
        let name = format!("agent{}", i + 1);
        let model_file = format!("{name}_model.json");
        let corpus_file = format!("{name}_corpus.tsv");
        write(&out.join(&model_file), &agent.model.to_json())?;
        let corpus = planchette_cli::build_agent_corpora(&experiment.vocabulary, *scheme)?;
        write(&out.join(&corpus_file), &corpus.to_tsv())?;
        agents.push(AgentReport {
            name,
            scheme: scheme.label().to_string(),
            noise_d: agent.noise_d,
            temperature: agent.temperature(experiment.dynamics.eta),
            model_file,
            corpus_file,
        });
    }
    write(&out.join("train_report.json"), &export::to_pretty_json(&TrainReport { agents })?)
}

fn conditions_for(experiment: &Experiment, selector: &str) -> Result<Vec<Condition>> {
    if selector == "all" {
        return Ok(experiment.conditions());
    }
    if selector == "collective" {
        return Ok(vec![Condition::Collective]);
    }
    if let Some(index) = selector.strip_prefix("agent") {
        let index: usize = index.parse().context("agent index")?;
        if index == 0 || index > experiment.agents.len() {
            bail!("no such agent {selector}");
        }
        return Ok(vec![Condition::Solo(index - 1)]);
    }
    bail!("unknown condition {selector:?} (use all, collective, or agent<k>)");
}

fn cmd_generate(experiment: &Experiment, args: &GenerateArgs, out: &Path) -> Result<()> {
    let mut summaries = Vec::new();
    for condition in conditions_for(experiment, &args.condition)? {
        let name = condition.name();
        let (summary, records) = experiment.run_trials(condition)?;

        write(&out.join(format!("frequency_{name}.csv")), &export::frequency_csv(&summary))?;
        write(
            &out.join(format!("generations_{name}.jsonl")),
            &export::generations_jsonl(&records, &experiment.board),
        )?;
        let density = weight_density(&summary);
        write(&out.join(format!("weights_{name}.csv")), &export::weights_csv(&density))?;
        write(
            &out.join(format!("weight_histogram_{name}.csv")),
            &export::weight_histogram_csv(&density),
        )?;
        for (trial, record) in records.iter().take(args.dump_trajectories).enumerate() {
            for (ci, traj) in record.per_char.iter().enumerate() {
                let path =
                    out.join(format!("trajectory_{name}_trial{trial:03}_c{ci:02}.csv"));
                write(&path, &export::trajectory_csv(traj, &experiment.dynamics, &experiment.board))?;
            }
        }
        summaries.push(summary);
    }
    write(&out.join("summary.json"), &export::to_pretty_json(&summaries)?)
}

fn cmd_oracle(experiment: &Experiment, args: &OracleArgs, out: &Path) -> Result<()> {
    let context = parse_context(experiment, &args.context)?;
    let dists = context_dists(experiment, &context);
    let ctx = EnergyContext::new(&experiment.board, &dists, experiment.dynamics.params)?;
    let temperature = args
        .temperature
        .unwrap_or_else(|| t_fused(&experiment.agents, experiment.dynamics.eta));

    let field = gibbs_oracle(&ctx, temperature, args.grid_step)?;
    write(&out.join("energy_field.csv"), &export::energy_field_csv(&ctx, &field.grid))?;
    write(
        &out.join("oracle_field.csv"),
        &export::prob_field_csv(&ctx, &field.grid, field.probs()),
    )?;

    let masses = char_mass_oracle(&ctx, temperature, args.grid_step)?;
    let alphabet = experiment.board.alphabet();
    let mut csv = String::from("symbol,mass,selection_mass\n");
    for s in alphabet.symbols() {
        csv.push_str(&format!(
            "{},{},{}\n",
            alphabet.label(s),
            masses.raw.prob(s),
            masses.selection.prob(s)
        ));
    }
    write(&out.join("char_masses.csv"), &csv)?;

    #[derive(Serialize)]
    struct OracleReport {
        context: String,
        temperature: f64,
        grid_step: f64,
        bos_mass: f64,
    }
    let report = OracleReport {
        context: args.context.clone(),
        temperature,
        grid_step: args.grid_step,
        bos_mass: masses.raw.prob(alphabet.bos()),
    };
    write(&out.join("oracle_report.json"), &export::to_pretty_json(&report)?)
}

fn cmd_compare(experiment: &Experiment, args: &CompareArgs, out: &Path) -> Result<()> {
    let context = parse_context(experiment, &args.context)?;
    let dists = context_dists(experiment, &context);
    let ctx = EnergyContext::new(&experiment.board, &dists, experiment.dynamics.params)?;
    let temperature = t_fused(&experiment.agents, experiment.dynamics.eta);

    let histogram = empirical_histogram(
        &experiment.agents,
        &context,
        &experiment.board,
        &experiment.dynamics,
        args.steps,
        args.burn_in,
        args.grid_step,
    )?;
    let empirical = histogram.normalized();
    let oracle = gibbs_oracle(&ctx, temperature, args.grid_step)?;
    let tv = total_variation(empirical.values(), oracle.probs())?;

    write(
        &out.join("empirical_field.csv"),
        &export::prob_field_csv(&ctx, &empirical, empirical.values()),
    )?;
    write(
        &out.join("oracle_field.csv"),
        &export::prob_field_csv(&ctx, &oracle.grid, oracle.probs()),
    )?;
    let report = export::CompareReport {
        context: args.context.clone(),
        temperature,
        grid_step: args.grid_step,
        steps: args.steps,
        burn_in: args.burn_in,
        seed: experiment.dynamics.seed,
        total_variation: tv,
    };
    write(&out.join("comparison.json"), &export::to_pretty_json(&report)?)?;
    println!("total variation: {tv}");
    Ok(())
}

fn cmd_perplexity(experiment: &Experiment, out: &Path) -> Result<()> {
    let mut words_by_condition = Vec::new();
    for condition in experiment.conditions() {
        let (summary, _) = experiment.run_trials(condition)?;
        words_by_condition.push((condition.name(), experiment.valid_words(&summary)));
    }
    let fused = experiment.fused_model()?;
    let mut evaluators: Vec<(String, &dyn CharModel)> = Vec::new();
    for (i, agent) in experiment.agents.iter().enumerate() {
        evaluators.push((format!("agent{}_lm", i + 1), &agent.model));
    }
    evaluators.push(("fused_lm".to_string(), &fused));

    let matrix = perplexity_matrix(&words_by_condition, &evaluators)?;
    for warning in &matrix.warnings {
        eprintln!("warning: {warning}");
    }
    write(&out.join("perplexity.csv"), &export::perplexity_csv(&matrix))?;
    write(&out.join("perplexity_report.json"), &export::to_pretty_json(&matrix)?)
}

fn cmd_ablate(experiment: &Experiment, args: &AblateArgs, out: &Path) -> Result<()> {
    let results = ablation_sweep(experiment, &args.temperatures)?;
    let points: Vec<_> = results.iter().map(|(p, _)| p.clone()).collect();
    write(&out.join("ablation.csv"), &export::ablation_csv(&points))?;
    for (point, summary) in &results {
        write(
            &out.join(format!("frequency_t{}.csv", point.t_i)),
            &export::frequency_csv(summary),
        )?;
    }
    Ok(())
}

fn cmd_render(experiment: &Experiment, args: &RenderArgs, out: &Path) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty input"))?;
    let board = &experiment.board;

    let svg = if header.starts_with("t,") {
        let mut positions = Vec::new();
        for line in lines {
            let mut fields = line.split(',');
            let _t = fields.next();
            let x: f64 = fields.next().ok_or_else(|| anyhow!("missing x"))?.parse()?;
            let y: f64 = fields.next().ok_or_else(|| anyhow!("missing y"))?.parse()?;
            positions.push(Position::new(x, y));
        }
        svg::render_trajectory_svg(&positions, board)
    } else if header.starts_with("x,y,") {
        let column = header.split(',').count() - 1;
        let mut cells = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let x: f64 = fields[0].parse()?;
            let y: f64 = fields[1].parse()?;
            let v: f64 = fields[column].parse()?;
            cells.push((Position::new(x, y), v));
        }
        let (grid, values) = field_from_cells(board, &cells)?;
        svg::render_field_svg(&grid, &values, board)
    } else {
        bail!("unrecognized CSV header {header:?}");
    };

    let output = args
        .output
        .clone()
        .unwrap_or_else(|| out.join(args.input.with_extension("svg").file_name().unwrap()));
    write(&output, &svg)
}

/// Rebuilds a grid from exported cell centers (step inferred from spacing).
fn field_from_cells(
    board: &BoardLayout,
    cells: &[(Position, f64)],
) -> Result<(Grid, Vec<f64>)> {
    let mut xs: Vec<f64> = cells.iter().map(|(p, _)| p.x).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if xs.len() < 2 {
        bail!("field has too few columns");
    }
    let step = xs[1] - xs[0];
    let mut grid = Grid::covering(board.bounds(), step)?;
    if grid.values().len() != cells.len() {
        bail!("field size {} does not match the board grid {}", cells.len(), grid.values().len());
    }
    let mut values = vec![0.0; cells.len()];
    for &(p, v) in cells {
        values[grid.bin(p)] = v;
    }
    grid.values_mut().copy_from_slice(&values);
    Ok((grid, values))
}
