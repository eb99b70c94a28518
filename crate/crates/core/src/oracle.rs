//! Brute-force verification tools: grid Gibbs fields, empirical histograms,
//! total-variation comparison, and character-level product-of-experts checks.
//!
//! The Gibbs field discretizes the stationary distribution
//! `P(x) ~ exp(-E_fused(x) / T)` on a regular grid over the clipped board
//! region, which makes the sampler's correctness checkable without any
//! closed-form normalizing constant: bin a long chain, compare in total
//! variation, and integrate per-symbol masses over nearest-goal regions.

use crate::alphabet::{Alphabet, Symbol};
use crate::board::{BoardLayout, Bounds, Position};
use crate::dynamics::{collective_step, AgentSpec, Drive, DynamicsConfig, Mode};
use crate::energy::EnergyContext;
use crate::lm::CharModel;
use crate::rng::{sample_index, StreamBundle};
use crate::{Error, Result};

/// Regular grid of cell values over a rectangle. Values are stored row-major
/// (`iy * nx + ix`), with cell centers offset half a step from the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    x_min: f64,
    y_min: f64,
    step: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Grid {
    /// A zeroed grid covering `bounds`. The step must tile both extents to
    /// within 1e-6 of an integer cell count.
    pub fn covering(bounds: Bounds, step: f64) -> Result<Grid> {
        if !(step > 0.0) {
            return Err(Error::InvalidConfig(format!("grid step {step} must be > 0")));
        }
        let fit = |extent: f64| -> Result<usize> {
            let n = extent / step;
            if (n - n.round()).abs() > 1e-6 * n.max(1.0) || n.round() < 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "grid step {step} does not tile extent {extent}"
                )));
            }
            Ok(n.round() as usize)
        };
        let nx = fit(bounds.width())?;
        let ny = fit(bounds.height())?;
        Ok(Grid {
            x_min: bounds.x_min,
            y_min: bounds.y_min,
            step,
            nx,
            ny,
            values: vec![0.0; nx * ny],
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Position {
        Position::new(
            self.x_min + (ix as f64 + 0.5) * self.step,
            self.y_min + (iy as f64 + 0.5) * self.step,
        )
    }

    /// Iterates `(cell center, value)` pairs.
    pub fn cells(&self) -> impl Iterator<Item = (Position, f64)> + '_ {
        (0..self.ny).flat_map(move |iy| {
            (0..self.nx).map(move |ix| (self.cell_center(ix, iy), self.values[iy * self.nx + ix]))
        })
    }

    /// Flat index of the cell containing `p` (boundary points go to the last
    /// cell on their axis).
    pub fn bin(&self, p: Position) -> usize {
        let ix = (((p.x - self.x_min) / self.step) as usize).min(self.nx - 1);
        let iy = (((p.y - self.y_min) / self.step) as usize).min(self.ny - 1);
        iy * self.nx + ix
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// A copy rescaled to total mass one.
    pub fn normalized(&self) -> Grid {
        let total = self.total();
        let mut grid = self.clone();
        grid.values.iter_mut().for_each(|v| *v /= total);
        grid
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.step - other.step).abs() < 1e-12
            && (self.x_min - other.x_min).abs() < 1e-12
            && (self.y_min - other.y_min).abs() < 1e-12
    }

    pub(crate) fn check_covers(&self, bounds: Bounds) -> Result<()> {
        let eps = 1e-9;
        let covers = (self.x_min - bounds.x_min).abs() < eps
            && (self.y_min - bounds.y_min).abs() < eps
            && (self.x_min + self.nx as f64 * self.step - bounds.x_max).abs() < 1e-6
            && (self.y_min + self.ny as f64 * self.step - bounds.y_max).abs() < 1e-6;
        if covers {
            Ok(())
        } else {
            Err(Error::InvalidConfig("grid does not cover the board bounds".into()))
        }
    }
}

/// Grid-discretized Gibbs distribution `exp(-E / T)` over the board.
#[derive(Clone, Debug)]
pub struct GibbsField {
    pub grid: Grid,
    pub temperature: f64,
}

impl GibbsField {
    /// Discretizes `exp(-energy(x) / T)` over `bounds`. Energies are shifted
    /// by their grid minimum before exponentiation so the exponentials cannot
    /// overflow; the shift cancels in the normalization.
    pub fn from_energy_fn(
        bounds: Bounds,
        grid_step: f64,
        temperature: f64,
        energy: impl Fn(Position) -> f64,
    ) -> Result<GibbsField> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "temperature {temperature} must be > 0"
            )));
        }
        let mut grid = Grid::covering(bounds, grid_step)?;
        let mut energies = Vec::with_capacity(grid.values.len());
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                energies.push(energy(grid.cell_center(ix, iy)));
            }
        }
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (v, e) in grid.values.iter_mut().zip(&energies) {
            *v = (-(e - min) / temperature).exp();
            total += *v;
        }
        grid.values.iter_mut().for_each(|v| *v /= total);
        Ok(GibbsField { grid, temperature })
    }

    pub fn probs(&self) -> &[f64] {
        self.grid.values()
    }
}

/// Gibbs field of the fused energy for a fixed context. The grid step must
/// resolve the board (at most a tenth of the smaller extent).
pub fn gibbs_oracle(
    ctx: &EnergyContext,
    temperature: f64,
    grid_step: f64,
) -> Result<GibbsField> {
    let bounds = ctx.board().bounds();
    if grid_step > bounds.width().min(bounds.height()) / 10.0 {
        return Err(Error::InvalidConfig(format!(
            "grid step {grid_step} too coarse for the board"
        )));
    }
    GibbsField::from_energy_fn(bounds, grid_step, temperature, |p| ctx.fused_energy(p))
}

/// Bins a long collective chain on a fixed context. Returns raw visit counts
/// (`steps - burn_in` in total); normalize before comparing to an oracle.
pub fn empirical_histogram(
    agents: &[AgentSpec],
    context: &[Symbol],
    board: &BoardLayout,
    cfg: &DynamicsConfig,
    steps: usize,
    burn_in: usize,
    grid_step: f64,
) -> Result<Grid> {
    if steps <= burn_in {
        return Err(Error::InvalidConfig(format!(
            "steps {steps} must exceed burn_in {burn_in}"
        )));
    }
    cfg.validate()?;
    let dists: Vec<Vec<f64>> =
        agents.iter().map(|a| a.model.next_char_dist(context)).collect();
    // Validates the distributions even though only the gradients are used.
    EnergyContext::new(board, &dists, cfg.params)?;

    let mut grid = Grid::covering(board.bounds(), grid_step)?;
    let mut streams = StreamBundle::new(cfg.seed, agents.len());
    let mut goals: Vec<Symbol> = vec![board.alphabet().bos(); agents.len()];
    let mut drives: Vec<Drive> = Vec::with_capacity(agents.len());
    let mut p = board.goal(board.alphabet().bos());
    for t in 0..steps {
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
        p = collective_step(agents, p, &drives, board, cfg, &mut streams);
        if t >= burn_in {
            let bin = grid.bin(p);
            grid.values[bin] += 1.0;
        }
    }
    Ok(grid)
}

/// `0.5 * sum |a - b|` between two normalized arrays of the same shape.
pub fn total_variation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { left: a.len(), right: b.len() });
    }
    for side in [a, b] {
        let sum: f64 = side.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { sum });
        }
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Natural-log entropy of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// Probability vector over the symbols of one alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct CharDistribution {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl CharDistribution {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<CharDistribution> {
        if probs.len() != alphabet.len() {
            return Err(Error::ShapeMismatch { left: probs.len(), right: alphabet.len() });
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidConfig("probabilities must be finite and >= 0".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(CharDistribution { alphabet, probs })
    }

    /// Builds from empirical counts.
    pub fn from_counts(alphabet: Alphabet, counts: &[u32]) -> Result<CharDistribution> {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidConfig("no counts to normalize".into()));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        CharDistribution::new(alphabet, probs)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, s: Symbol) -> f64 {
        self.probs[s.index()]
    }
}

/// Per-symbol masses of a Gibbs field, both as integrated (with BOS) and as
/// a selection distribution (BOS excluded and renormalized).
#[derive(Clone, Debug)]
pub struct CharMasses {
    pub raw: CharDistribution,
    pub selection: CharDistribution,
}

/// Integrates the fused Gibbs field over each symbol's nearest-goal region.
pub fn char_mass_oracle(
    ctx: &EnergyContext,
    temperature: f64,
    grid_step: f64,
) -> Result<CharMasses> {
    let field = gibbs_oracle(ctx, temperature, grid_step)?;
    let masses = ctx.board().voronoi_cell_mass(&field.grid)?;
    let alphabet = ctx.board().alphabet().clone();
    let bos = alphabet.bos().index();
    let mut selection = masses.clone();
    selection[bos] = 0.0;
    let remaining: f64 = selection.iter().sum();
    selection.iter_mut().for_each(|m| *m /= remaining);
    // Raw masses can carry a hair more than 1e-9 of integration slack, so
    // normalize defensively before wrapping.
    let total: f64 = masses.iter().sum();
    let raw: Vec<f64> = masses.iter().map(|m| m / total).collect();
    Ok(CharMasses {
        raw: CharDistribution::new(alphabet.clone(), raw)?,
        selection: CharDistribution::new(alphabet, selection)?,
    })
}

/// Normalized weighted geometric mean of character distributions, with the
/// symbols that vanish in every component excluded.
#[derive(Clone, Debug)]
pub struct PoeProduct {
    pub dist: CharDistribution,
    /// Symbols with zero probability in every component.
    pub excluded: Vec<Symbol>,
}

/// Computes `normalize(prod_i masses_i ^ exponents_i)` in log space.
pub fn poe_product(masses: &[CharDistribution], exponents: &[f64]) -> Result<PoeProduct> {
    if masses.is_empty() || masses.len() != exponents.len() {
        return Err(Error::ShapeMismatch { left: masses.len(), right: exponents.len() });
    }
    if exponents.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidConfig("exponents must be positive".into()));
    }
    let sum: f64 = exponents.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { sum });
    }
    let alphabet = masses[0].alphabet().clone();
    if masses.iter().any(|m| m.alphabet() != &alphabet) {
        return Err(Error::AlphabetMismatch);
    }

    let n = alphabet.len();
    let mut excluded = Vec::new();
    let mut log_probs = vec![0.0f64; n];
    for i in 0..n {
        let s = Symbol(i as u8);
        if masses.iter().all(|m| m.prob(s) == 0.0) {
            excluded.push(s);
            log_probs[i] = f64::NEG_INFINITY;
            continue;
        }
        for (m, &e) in masses.iter().zip(exponents) {
            let p = m.prob(s);
            log_probs[i] += if p > 0.0 { e * p.ln() } else { f64::NEG_INFINITY };
        }
    }
    let max = log_probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig("product of experts has empty support".into()));
    }
    let mut probs: Vec<f64> =
        log_probs.iter().map(|&lp| if lp > f64::NEG_INFINITY { (lp - max).exp() } else { 0.0 }).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(PoeProduct { dist: CharDistribution::new(alphabet, probs)?, excluded })
}

/// Total variation between a collective character distribution and the
/// tempered product of the per-agent ones. The relation is approximate by
/// construction, so the caller judges the returned distance against its own
/// threshold.
pub fn poe_char_check(
    agent_masses: &[CharDistribution],
    exponents: &[f64],
    collective_mass: &CharDistribution,
) -> Result<f64> {
    let product = poe_product(agent_masses, exponents)?;
    total_variation(collective_mass.probs(), product.dist.probs())
}
