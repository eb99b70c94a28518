//! Collective planchette dynamics.
//!
//! Each step, every agent contributes `-eta * grad(E_i) + sqrt(2 D_i) * xi`
//! toward the shared position, which is then clipped into the board. Summed
//! over agents this is an unadjusted Langevin step on the fused landscape at
//! effective temperature `sum(D_i) / eta`. A character is selected by running
//! the chain for a fixed number of steps and letting the trailing fraction of
//! positions vote for their nearest goals; the outer loop appends selections
//! to the context until EOS or a length cap.
//!
//! In `Marginal` mode an agent descends its effective (probability-averaged)
//! energy. In `Resample` mode it descends the elemental energy of a single
//! goal freshly sampled from its model every `delta_t` steps; with
//! `delta_t = 1` the expected drift coincides with the marginal one.

use serde::{Deserialize, Serialize};

use crate::alphabet::Symbol;
use crate::board::{BoardLayout, Position};
use crate::energy::{
    effective_gradient, elemental_gradient, EnergyContext, PotentialParams, Vec2,
};
use crate::lm::{CharModel, NgramModel};
use crate::rng::{normal_pair, sample_index, StreamBundle};
use crate::{Error, Result};

/// How an agent turns its next-character distribution into a drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Marginal,
    Resample,
}

/// Step size, loop lengths, vote window, and potential parameters for one
/// run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub eta: f64,
    pub delta_t: usize,
    pub t_max_inner: usize,
    /// Trailing fraction of inner steps that vote; burn-in is the rest.
    pub vote_fraction: f64,
    pub t_max_outer: usize,
    pub mode: Mode,
    /// Start each character from the previous character's final position
    /// instead of resetting to the BOS goal.
    pub continue_from_previous: bool,
    pub params: PotentialParams,
    pub seed: u64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            eta: 0.1,
            delta_t: 1,
            t_max_inner: 2000,
            vote_fraction: 0.05,
            t_max_outer: 20,
            mode: Mode::Marginal,
            continue_from_previous: false,
            params: PotentialParams::default(),
            seed: 0,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!("eta {} must be > 0", self.eta)));
        }
        if self.delta_t < 1 || self.delta_t > self.t_max_inner {
            return Err(Error::InvalidConfig(format!(
                "delta_t {} must be in 1..={}",
                self.delta_t, self.t_max_inner
            )));
        }
        if !(self.vote_fraction > 0.0 && self.vote_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "vote_fraction {} must be in (0, 1]",
                self.vote_fraction
            )));
        }
        PotentialParams::new(self.params.r0, self.params.phi0)?;
        Ok(())
    }

    /// Number of trailing steps that vote.
    pub fn vote_steps(&self) -> usize {
        (self.vote_fraction * self.t_max_inner as f64).ceil() as usize
    }

    /// Number of leading steps discarded before voting starts.
    pub fn burn_in_steps(&self) -> usize {
        self.t_max_inner - self.vote_steps()
    }
}

/// One participant: a language model plus a diffusion coefficient.
#[derive(Clone, Debug)]
pub struct AgentSpec {
    pub model: NgramModel,
    pub noise_d: f64,
}

impl AgentSpec {
    pub fn new(model: NgramModel, noise_d: f64) -> Result<AgentSpec> {
        if !(noise_d >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise_d {noise_d} must be >= 0")));
        }
        Ok(AgentSpec { model, noise_d })
    }

    /// Per-agent temperature `D_i / eta`.
    pub fn temperature(&self, eta: f64) -> f64 {
        self.noise_d / eta
    }
}

/// Total diffusion `sum(D_i)`.
pub fn d_fused(agents: &[AgentSpec]) -> f64 {
    agents.iter().map(|a| a.noise_d).sum()
}

/// Effective temperature of the collective chain, `sum(D_i) / eta`.
pub fn t_fused(agents: &[AgentSpec], eta: f64) -> f64 {
    d_fused(agents) / eta
}

/// What an agent is descending this step.
#[derive(Clone, Copy, Debug)]
pub enum Drive<'a> {
    /// Effective-energy gradient for this next-character distribution.
    Marginal(&'a [f64]),
    /// Elemental gradient toward the currently sampled goal.
    Goal(Symbol),
}

/// One agent's micro-action: `-eta * grad(E_i) + sqrt(2 D_i) * xi` with a
/// fresh standard-normal pair from the agent's stream (x drawn first).
pub fn agent_action(
    agent: &AgentSpec,
    p: Position,
    drive: Drive,
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec2 {
    let grad = match drive {
        Drive::Marginal(dist) => effective_gradient(p, dist, board, &cfg.params),
        Drive::Goal(c) => elemental_gradient(p, board.goal(c), &cfg.params),
    };
    let (nx, ny) = normal_pair(rng);
    let scale = (2.0 * agent.noise_d).sqrt();
    Vec2::new(-cfg.eta * grad.x + scale * nx, -cfg.eta * grad.y + scale * ny)
}

/// Unclipped sum of all agents' actions at `p`. Consumes exactly one normal
/// pair per agent, in agent order.
pub fn collective_increment(
    agents: &[AgentSpec],
    p: Position,
    drives: &[Drive],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    streams: &mut StreamBundle,
) -> Vec2 {
    let mut increment = Vec2::default();
    for (i, (agent, drive)) in agents.iter().zip(drives).enumerate() {
        increment += agent_action(agent, p, *drive, board, cfg, streams.agent(i));
    }
    increment
}

/// One collective update: `clip(p + sum_i a_i)`.
pub fn collective_step(
    agents: &[AgentSpec],
    p: Position,
    drives: &[Drive],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    streams: &mut StreamBundle,
) -> Position {
    board.clip(p + collective_increment(agents, p, drives, board, cfg, streams))
}

/// Reference driver: a single ULA step on the fused landscape,
/// `clip(p - eta * grad(E_fused) + sqrt(2 D_fused) * xi)`.
pub fn centralized_ula_step(
    p: Position,
    ctx: &EnergyContext,
    eta: f64,
    d_fused: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Position {
    let grad = ctx.fused_gradient(p);
    let (nx, ny) = normal_pair(rng);
    let scale = (2.0 * d_fused).sqrt();
    ctx.board().clip(Position::new(
        p.x - eta * grad.x + scale * nx,
        p.y - eta * grad.y + scale * ny,
    ))
}

/// One inner-loop run: the visited positions, the fused (effective) energy
/// after each step, the vote histogram, and the selected symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `t_max_inner + 1` positions including the start.
    pub positions: Vec<Position>,
    /// Fused effective energy at each post-step position (`t_max_inner`
    /// values).
    pub fused_energy: Vec<f64>,
    pub selected: Symbol,
    /// Vote count per symbol index; totals the vote window length.
    pub votes: Vec<u32>,
}

impl Trajectory {
    pub fn final_position(&self) -> Position {
        *self.positions.last().expect("trajectory has a start position")
    }
}

fn validate_agents(agents: &[AgentSpec], board: &BoardLayout) -> Result<()> {
    if agents.is_empty() {
        return Err(Error::InvalidConfig("at least one agent is required".into()));
    }
    for agent in agents {
        if !(agent.noise_d >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise_d {} must be >= 0",
                agent.noise_d
            )));
        }
        if agent.model.alphabet() != board.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
    }
    Ok(())
}

/// Runs the inner loop for one character starting from the BOS goal.
pub fn select_character(
    agents: &[AgentSpec],
    context: &[Symbol],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    streams: &mut StreamBundle,
) -> Result<Trajectory> {
    select_character_from(board.goal(board.alphabet().bos()), agents, context, board, cfg, streams)
}

/// Runs the inner loop for one character from an explicit start position.
///
/// During the trailing `vote_steps` steps each post-step position votes for
/// its nearest goal. BOS votes are recorded but BOS can never be selected;
/// ties go to the lowest symbol index.
pub fn select_character_from(
    start: Position,
    agents: &[AgentSpec],
    context: &[Symbol],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    streams: &mut StreamBundle,
) -> Result<Trajectory> {
    cfg.validate()?;
    validate_agents(agents, board)?;
    let dists: Vec<Vec<f64>> =
        agents.iter().map(|a| a.model.next_char_dist(context)).collect();
    let ctx = EnergyContext::new(board, &dists, cfg.params)?;

    let burn_in = cfg.burn_in_steps();
    let mut goals: Vec<Symbol> = vec![board.alphabet().bos(); agents.len()];
    let mut drives: Vec<Drive> = Vec::with_capacity(agents.len());
    let mut p = board.clip(start);
    let mut positions = Vec::with_capacity(cfg.t_max_inner + 1);
    let mut energies = Vec::with_capacity(cfg.t_max_inner);
    let mut votes = vec![0u32; board.alphabet().len()];
    positions.push(p);

    for t in 0..cfg.t_max_inner {
        if cfg.mode == Mode::Resample && t % cfg.delta_t == 0 {
            for (goal, dist) in goals.iter_mut().zip(&dists) {
                *goal = Symbol(sample_index(streams.resample(), dist) as u8);
            }
        }
        drives.clear();
        match cfg.mode {
            Mode::Marginal => drives.extend(dists.iter().map(|d| Drive::Marginal(d))),
            Mode::Resample => drives.extend(goals.iter().map(|&g| Drive::Goal(g))),
        }
        p = collective_step(agents, p, &drives, board, cfg, streams);
        positions.push(p);
        energies.push(ctx.fused_energy(p));
        if t + 1 > burn_in {
            votes[board.nearest_goal(p).index()] += 1;
        }
    }

    let bos = board.alphabet().bos();
    let selected = board
        .alphabet()
        .symbols()
        .filter(|&s| s != bos)
        .max_by(|&s, &t| votes[s.index()].cmp(&votes[t.index()]).then(t.cmp(&s)))
        .expect("alphabet has emittable symbols");
    Ok(Trajectory { positions, fused_energy: energies, selected, votes })
}

/// One full generation: sequence, per-character trajectories, and the seed
/// it is reproducible from.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    /// Selected symbols, EOS-terminated unless the length cap was hit.
    pub sequence: Vec<Symbol>,
    pub per_char: Vec<Trajectory>,
    pub seed: u64,
}

impl GenerationRecord {
    /// The generated word: the sequence's letters, without the terminal EOS.
    pub fn word(&self, board: &BoardLayout) -> String {
        board.alphabet().decode_letters(&self.sequence)
    }

    pub fn terminated_by_eos(&self, board: &BoardLayout) -> bool {
        self.sequence.last() == Some(&board.alphabet().eos())
    }
}

/// Runs the outer loop with the seed from `cfg`.
pub fn generate_sequence(
    agents: &[AgentSpec],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
) -> Result<GenerationRecord> {
    generate_sequence_seeded(agents, board, cfg, cfg.seed)
}

/// Runs the outer loop with an explicit seed (used for per-trial seeds).
pub fn generate_sequence_seeded(
    agents: &[AgentSpec],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    seed: u64,
) -> Result<GenerationRecord> {
    cfg.validate()?;
    validate_agents(agents, board)?;
    let mut streams = StreamBundle::new(seed, agents.len());
    let eos = board.alphabet().eos();
    let bos_goal = board.goal(board.alphabet().bos());

    let mut sequence = Vec::new();
    let mut per_char = Vec::new();
    let mut start = bos_goal;
    while sequence.len() < cfg.t_max_outer {
        let traj = select_character_from(start, agents, &sequence, board, cfg, &mut streams)?;
        let selected = traj.selected;
        start = if cfg.continue_from_previous { traj.final_position() } else { bos_goal };
        sequence.push(selected);
        per_char.push(traj);
        if selected == eos {
            break;
        }
    }
    Ok(GenerationRecord { sequence, per_char, seed })
}
