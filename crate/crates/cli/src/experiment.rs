//! Multi-trial experiment execution and tabulation.
//!
//! An experiment fixes a board, per-agent language models, and a dynamics
//! configuration, then runs independent generation trials per condition:
//! each agent alone (`agent1`, `agent2`, ...) and all agents together
//! (`collective`). Trials run in a work pool; every trial derives its own
//! seed from (seed, condition, trial index) so aggregation order never
//! affects results.

use std::collections::BTreeMap;
use std::fs;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use planchette_core::board::BoardLayout;
use planchette_core::dynamics::{
    generate_sequence_seeded, AgentSpec, DynamicsConfig, GenerationRecord,
};
use planchette_core::lm::{
    fuse_char_models, perplexity, sequence_logprob, CharModel, FusedCharModel, NgramModel,
    Vocabulary,
};
use planchette_core::oracle::entropy;
use planchette_core::rng::{mix64, trial_seed};

use crate::config::ExperimentConfig;
use crate::corpus::{build_agent_corpora, bundled_vocabulary, Scheme};

/// Which agents drive the planchette for one run of trials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Collective,
    Solo(usize),
}

impl Condition {
    pub fn name(self) -> String {
        match self {
            Condition::Collective => "collective".into(),
            Condition::Solo(i) => format!("agent{}", i + 1),
        }
    }

    fn seed_tag(self) -> u64 {
        match self {
            Condition::Collective => 0,
            Condition::Solo(i) => i as u64 + 1,
        }
    }
}

/// One aggregated word outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordRow {
    /// Letters of the generated sequence; empty when the first selection was
    /// EOS.
    pub word: String,
    pub count: u32,
    /// `exp(sequence_logprob)` under the condition's own model.
    pub probability: f64,
    /// Exact membership in the base vocabulary.
    pub valid: bool,
    /// Colorfulness weight of valid words.
    pub weight: Option<f64>,
}

/// Frequency table and summary statistics for one condition.
#[derive(Clone, Debug, Serialize)]
pub struct TrialSummary {
    pub condition: String,
    pub trials: usize,
    pub seed: u64,
    /// Rows sorted by descending count, then word.
    pub rows: Vec<WordRow>,
    /// Natural-log entropy of the word distribution, invalid words included.
    pub entropy: f64,
    /// Trials whose output was a vocabulary word.
    pub valid_trials: usize,
    pub distinct_words: usize,
    pub mean_valid_weight: Option<f64>,
}

impl TrialSummary {
    pub fn frequency_total(&self) -> u32 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// A fully materialized experiment: board, trained models, dynamics.
pub struct Experiment {
    pub board: BoardLayout,
    pub vocabulary: Vocabulary,
    pub agents: Vec<AgentSpec>,
    pub schemes: Vec<Scheme>,
    pub dynamics: DynamicsConfig,
    pub trials: usize,
}

impl Experiment {
    /// Loads files, reweights corpora, and trains the per-agent models.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Experiment> {
        if cfg.trials < 1 {
            bail!("trials must be >= 1");
        }
        if cfg.agents.is_empty() {
            bail!("at least one agent is required");
        }
        let board = if cfg.board == "default" {
            BoardLayout::default_latin()
        } else {
            let text = fs::read_to_string(&cfg.board)
                .with_context(|| format!("reading board file {}", cfg.board))?;
            BoardLayout::from_board_file(&text)?
        };
        let vocabulary = if cfg.vocabulary == "bundled" {
            bundled_vocabulary()
        } else {
            let text = fs::read_to_string(&cfg.vocabulary)
                .with_context(|| format!("reading vocabulary file {}", cfg.vocabulary))?;
            Vocabulary::from_tsv(&text)?
        };

        let mut agents = Vec::with_capacity(cfg.agents.len());
        let mut schemes = Vec::with_capacity(cfg.agents.len());
        for agent_cfg in &cfg.agents {
            let corpus = build_agent_corpora(&vocabulary, agent_cfg.scheme)?;
            let model = NgramModel::train_weighted(
                &corpus,
                board.alphabet(),
                cfg.lm.order,
                cfg.lm.alpha,
                cfg.lm.train,
            )?;
            agents.push(AgentSpec::new(model, agent_cfg.noise_d)?);
            schemes.push(agent_cfg.scheme);
        }

        let dynamics = cfg.dynamics_config();
        dynamics.validate()?;
        Ok(Experiment { board, vocabulary, agents, schemes, dynamics, trials: cfg.trials })
    }

    /// Solo conditions in agent order, then the collective one.
    pub fn conditions(&self) -> Vec<Condition> {
        let mut all: Vec<Condition> = (0..self.agents.len()).map(Condition::Solo).collect();
        all.push(Condition::Collective);
        all
    }

    pub fn condition_agents(&self, condition: Condition) -> Vec<AgentSpec> {
        match condition {
            Condition::Collective => self.agents.to_vec(),
            Condition::Solo(i) => vec![self.agents[i].clone()],
        }
    }

    /// Product-of-experts fusion of the agents' models with exponents
    /// `D_i / sum(D)` (uniform when all noise is off).
    pub fn fused_model(&self) -> Result<FusedCharModel> {
        let total: f64 = self.agents.iter().map(|a| a.noise_d).sum();
        let exponents: Vec<f64> = if total > 0.0 {
            self.agents.iter().map(|a| a.noise_d / total).collect()
        } else {
            vec![1.0 / self.agents.len() as f64; self.agents.len()]
        };
        let models: Vec<NgramModel> = self.agents.iter().map(|a| a.model.clone()).collect();
        Ok(fuse_char_models(models, &exponents)?)
    }

    /// The model a condition's outputs are scored with in frequency tables.
    pub fn evaluator(&self, condition: Condition) -> Result<Box<dyn CharModel>> {
        Ok(match condition {
            Condition::Solo(i) => Box::new(self.agents[i].model.clone()),
            Condition::Collective => Box::new(self.fused_model()?),
        })
    }

    /// Runs the condition's trials in a work pool and aggregates them in
    /// trial-index order.
    pub fn run_trials(
        &self,
        condition: Condition,
    ) -> Result<(TrialSummary, Vec<GenerationRecord>)> {
        let agents = self.condition_agents(condition);
        let condition_seed = mix64(self.dynamics.seed ^ mix64(condition.seed_tag()));
        let records: Vec<GenerationRecord> = (0..self.trials)
            .into_par_iter()
            .map(|k| {
                generate_sequence_seeded(
                    &agents,
                    &self.board,
                    &self.dynamics,
                    trial_seed(condition_seed, k as u64),
                )
            })
            .collect::<planchette_core::Result<_>>()?;

        let evaluator = self.evaluator(condition)?;
        let summary = self.summarize(condition, condition_seed, &records, evaluator.as_ref())?;
        Ok((summary, records))
    }

    fn summarize(
        &self,
        condition: Condition,
        seed: u64,
        records: &[GenerationRecord],
        evaluator: &dyn CharModel,
    ) -> Result<TrialSummary> {
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for record in records {
            *counts.entry(record.word(&self.board)).or_insert(0) += 1;
        }
        let mut rows = Vec::with_capacity(counts.len());
        let mut valid_trials = 0usize;
        let mut weight_sum = 0.0;
        let mut weight_n = 0u32;
        for (word, count) in counts {
            let valid = self.vocabulary.contains(&word);
            let weight = self.vocabulary.weight(&word);
            if valid {
                valid_trials += count as usize;
                weight_sum += weight.unwrap_or(0.0) * count as f64;
                weight_n += count;
            }
            let probability = sequence_logprob(evaluator, &word)?.exp();
            rows.push(WordRow { word, count, probability, valid, weight });
        }
        rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.word.cmp(&b.word)));

        let total: u32 = rows.iter().map(|r| r.count).sum();
        let probs: Vec<f64> =
            rows.iter().map(|r| r.count as f64 / total as f64).collect();
        Ok(TrialSummary {
            condition: condition.name(),
            trials: records.len(),
            seed,
            distinct_words: rows.len(),
            entropy: entropy(&probs),
            valid_trials,
            mean_valid_weight: (weight_n > 0).then(|| weight_sum / weight_n as f64),
            rows,
        })
    }

    /// Valid words generated by a condition, one entry per trial.
    pub fn valid_words(&self, summary: &TrialSummary) -> Vec<String> {
        let mut words = Vec::new();
        for row in &summary.rows {
            if row.valid {
                for _ in 0..row.count {
                    words.push(row.word.clone());
                }
            }
        }
        words
    }
}

/// Rows are generating conditions, columns are evaluating models. `None`
/// marks a row dropped for want of valid words (reported in `warnings`).
#[derive(Clone, Debug, Serialize)]
pub struct PerplexityMatrix {
    pub evaluators: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl PerplexityMatrix {
    pub fn value(&self, condition: &str, evaluator: &str) -> Option<f64> {
        let col = self.evaluators.iter().position(|e| e == evaluator)?;
        let row = self.rows.iter().find(|(c, _)| c == condition)?;
        Some(row.1[col])
    }
}

/// Character-level perplexity of each condition's valid generations under
/// each evaluator. Conditions with no valid words are skipped with a
/// warning.
pub fn perplexity_matrix(
    words_by_condition: &[(String, Vec<String>)],
    evaluators: &[(String, &dyn CharModel)],
) -> Result<PerplexityMatrix> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (condition, words) in words_by_condition {
        if words.is_empty() {
            warnings.push(format!("condition {condition} produced no valid words; row omitted"));
            continue;
        }
        let mut values = Vec::with_capacity(evaluators.len());
        for (_, model) in evaluators {
            values.push(perplexity(*model, words)?);
        }
        rows.push((condition.clone(), values));
    }
    Ok(PerplexityMatrix {
        evaluators: evaluators.iter().map(|(name, _)| name.clone()).collect(),
        rows,
        warnings,
    })
}

/// One point of the noise ablation.
#[derive(Clone, Debug, Serialize)]
pub struct AblationPoint {
    /// Per-agent temperature; each agent runs at `D_i = t_i * eta`.
    pub t_i: f64,
    pub valid_trials: usize,
    pub distinct_words: usize,
    pub entropy: f64,
}

/// Reruns the collective condition at each per-agent temperature.
pub fn ablation_sweep(
    experiment: &Experiment,
    temperatures: &[f64],
) -> Result<Vec<(AblationPoint, TrialSummary)>> {
    let mut out = Vec::with_capacity(temperatures.len());
    for &t_i in temperatures {
        if t_i < 0.0 {
            bail!("temperatures must be >= 0, got {t_i}");
        }
        let mut tuned = Experiment {
            board: experiment.board.clone(),
            vocabulary: experiment.vocabulary.clone(),
            agents: experiment.agents.to_vec(),
            schemes: experiment.schemes.clone(),
            dynamics: experiment.dynamics.clone(),
            trials: experiment.trials,
        };
        for agent in &mut tuned.agents {
            agent.noise_d = t_i * tuned.dynamics.eta;
        }
        let (summary, _) = tuned.run_trials(Condition::Collective)?;
        out.push((
            AblationPoint {
                t_i,
                valid_trials: summary.valid_trials,
                distinct_words: summary.distinct_words,
                entropy: summary.entropy,
            },
            summary,
        ));
    }
    Ok(out)
}

/// Weights of valid generated words plus a fixed 20-bin histogram over
/// `[0, 1]`.
#[derive(Clone, Debug)]
pub struct WeightDensity {
    pub condition: String,
    /// One weight per valid generated word (trial multiplicity preserved).
    pub weights: Vec<f64>,
    pub histogram: [u32; 20],
    pub mean: Option<f64>,
}

pub fn weight_density(summary: &TrialSummary) -> WeightDensity {
    let mut weights = Vec::new();
    for row in &summary.rows {
        if let (true, Some(w)) = (row.valid, row.weight) {
            for _ in 0..row.count {
                weights.push(w);
            }
        }
    }
    let mut histogram = [0u32; 20];
    for &w in &weights {
        let bin = ((w * 20.0) as usize).min(19);
        histogram[bin] += 1;
    }
    let mean = if weights.is_empty() {
        None
    } else {
        Some(weights.iter().sum::<f64>() / weights.len() as f64)
    };
    WeightDensity { condition: summary.condition.clone(), weights, histogram, mean }
}
