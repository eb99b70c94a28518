//! Deterministic text emission: CSV tables, JSONL generation records, and
//! structured comparison reports. Identical inputs produce byte-identical
//! output (floats print in shortest round-trip form).

use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;

use planchette_core::board::BoardLayout;
use planchette_core::dynamics::{DynamicsConfig, GenerationRecord, Trajectory};
use planchette_core::energy::EnergyContext;
use planchette_core::oracle::Grid;

use crate::experiment::{AblationPoint, PerplexityMatrix, TrialSummary, WeightDensity};

/// Display form of a generated word; a bare EOS selection shows as "EOS".
pub fn display_word(word: &str) -> &str {
    if word.is_empty() {
        "EOS"
    } else {
        word
    }
}

/// `x,y,E_fused` over a grid of cell centers.
pub fn energy_field_csv(ctx: &EnergyContext, grid: &Grid) -> String {
    let mut out = String::from("x,y,E_fused\n");
    for (cell, _) in grid.cells() {
        writeln!(out, "{},{},{}", cell.x, cell.y, ctx.fused_energy(cell)).unwrap();
    }
    out
}

/// `x,y,E_fused,prob` for oracle fields and empirical histograms. `probs`
/// must be normalized and aligned with the grid cells.
pub fn prob_field_csv(ctx: &EnergyContext, grid: &Grid, probs: &[f64]) -> String {
    let mut out = String::from("x,y,E_fused,prob\n");
    for ((cell, _), &p) in grid.cells().zip(probs) {
        writeln!(out, "{},{},{},{}", cell.x, cell.y, ctx.fused_energy(cell), p).unwrap();
    }
    out
}

/// `t,x,y,E_fused,voted_symbol`. The energy column is empty at `t = 0` and
/// the vote column is empty through the burn-in.
pub fn trajectory_csv(traj: &Trajectory, cfg: &DynamicsConfig, board: &BoardLayout) -> String {
    let burn_in = cfg.burn_in_steps();
    let mut out = String::from("t,x,y,E_fused,voted_symbol\n");
    for (t, p) in traj.positions.iter().enumerate() {
        let energy = if t == 0 { String::new() } else { traj.fused_energy[t - 1].to_string() };
        let voted = if t > burn_in {
            board.alphabet().label(board.nearest_goal(*p))
        } else {
            String::new()
        };
        writeln!(out, "{},{},{},{},{}", t, p.x, p.y, energy, voted).unwrap();
    }
    out
}

/// One JSON object per generation: sequence labels, the word, per-character
/// vote histograms (nonzero entries only), and the trial seed.
pub fn generations_jsonl(records: &[GenerationRecord], board: &BoardLayout) -> String {
    #[derive(Serialize)]
    struct Line<'a> {
        sequence: Vec<String>,
        word: &'a str,
        votes: Vec<std::collections::BTreeMap<String, u32>>,
        seed: u64,
    }
    let alphabet = board.alphabet();
    let mut out = String::new();
    for record in records {
        let word = record.word(board);
        let line = Line {
            sequence: record.sequence.iter().map(|&s| alphabet.label(s)).collect(),
            word: &word,
            votes: record
                .per_char
                .iter()
                .map(|traj| {
                    traj.votes
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(i, &c)| {
                            (alphabet.label(planchette_core::Symbol(i as u8)), c)
                        })
                        .collect()
                })
                .collect(),
            seed: record.seed,
        };
        out.push_str(&serde_json::to_string(&line).expect("serializable"));
        out.push('\n');
    }
    out
}

/// Frequency table: `word,count,probability,valid,weight`.
pub fn frequency_csv(summary: &TrialSummary) -> String {
    let mut out = String::from("word,count,probability,valid,weight\n");
    for row in &summary.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            display_word(&row.word),
            row.count,
            row.probability,
            row.valid,
            row.weight.map(|w| w.to_string()).unwrap_or_default()
        )
        .unwrap();
    }
    out
}

/// Matrix CSV: `condition,<evaluator...>`.
pub fn perplexity_csv(matrix: &PerplexityMatrix) -> String {
    let mut out = String::from("condition");
    for name in &matrix.evaluators {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for (condition, values) in &matrix.rows {
        write!(out, "{condition}").unwrap();
        for v in values {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Sweep CSV: `t_i,valid_trials,distinct_words,entropy`.
pub fn ablation_csv(points: &[AblationPoint]) -> String {
    let mut out = String::from("t_i,valid_trials,distinct_words,entropy\n");
    for p in points {
        writeln!(out, "{},{},{},{}", p.t_i, p.valid_trials, p.distinct_words, p.entropy).unwrap();
    }
    out
}

/// Long-format weights: `condition,weight`, one row per valid generated
/// word. Header only when nothing was valid.
pub fn weights_csv(density: &WeightDensity) -> String {
    let mut out = String::from("condition,weight\n");
    for w in &density.weights {
        writeln!(out, "{},{}", density.condition, w).unwrap();
    }
    out
}

/// Fixed-bin histogram: `condition,bin_low,bin_high,count` over 20 bins of
/// `[0, 1]`.
pub fn weight_histogram_csv(density: &WeightDensity) -> String {
    let mut out = String::from("condition,bin_low,bin_high,count\n");
    for (i, count) in density.histogram.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            density.condition,
            i as f64 / 20.0,
            (i + 1) as f64 / 20.0,
            count
        )
        .unwrap();
    }
    out
}

/// Structured report for empirical-vs-oracle comparisons.
#[derive(Serialize)]
pub struct CompareReport {
    pub context: String,
    pub temperature: f64,
    pub grid_step: f64,
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub total_variation: f64,
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use planchette_core::dynamics::{select_character, AgentSpec};
    use planchette_core::energy::PotentialParams;
    use planchette_core::lm::{NgramModel, TrainMode, Vocabulary};
    use planchette_core::rng::StreamBundle;

    fn setup() -> (BoardLayout, Vec<AgentSpec>, DynamicsConfig) {
        let board = BoardLayout::default_latin();
        let vocab = Vocabulary::new(vec![("rose".into(), 1.0)]).unwrap();
        let model =
            NgramModel::train_weighted(&vocab, board.alphabet(), 2, 1e-3, TrainMode::Expectation)
                .unwrap();
        let agents = vec![AgentSpec::new(model, 0.01).unwrap()];
        let cfg = DynamicsConfig { t_max_inner: 40, seed: 5, ..DynamicsConfig::default() };
        (board, agents, cfg)
    }

    #[test]
    fn trajectory_csv_has_one_row_per_position() {
        let (board, agents, cfg) = setup();
        let mut streams = StreamBundle::new(cfg.seed, 1);
        let traj = select_character(&agents, &[], &board, &cfg, &mut streams).unwrap();
        let csv = trajectory_csv(&traj, &cfg, &board);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), cfg.t_max_inner + 2);
        assert!(lines[1].starts_with("0,3,0,,"), "t=0 row: {}", lines[1]);
        // Energy column empty only at t = 0; vote column filled only in the
        // trailing window.
        assert!(lines[2].split(',').nth(3).unwrap().len() > 1);
        let last = lines.last().unwrap();
        assert!(!last.ends_with(','));
    }

    #[test]
    fn field_csvs_are_deterministic() {
        let (board, agents, _cfg) = setup();
        let dists: Vec<Vec<f64>> = agents
            .iter()
            .map(|a| {
                use planchette_core::lm::CharModel;
                a.model.next_char_dist(&[])
            })
            .collect();
        let ctx = EnergyContext::new(&board, &dists, PotentialParams::default()).unwrap();
        let grid = Grid::covering(board.bounds(), 0.5).unwrap();
        let a = energy_field_csv(&ctx, &grid);
        let b = energy_field_csv(&ctx, &grid);
        assert_eq!(a, b);
        assert!(a.starts_with("x,y,E_fused\n"));
        assert_eq!(a.lines().count(), grid.values().len() + 1);
    }

    #[test]
    fn empty_word_displays_as_eos() {
        assert_eq!(display_word(""), "EOS");
        assert_eq!(display_word("rose"), "rose");
    }
}
