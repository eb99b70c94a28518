//! Energy landscapes over the board and their analytic gradients.
//!
//! Each agent's next-character distribution turns the board into an effective
//! potential: a probability-weighted mixture of Cauchy wells centered on the
//! symbol goals. Summing the agents' effective energies gives the fused
//! landscape the collective dynamics descend. Minima sit at high-probability
//! goals, so the Gibbs distribution of the fused energy concentrates where
//! the agents agree.

use crate::board::{BoardLayout, Position};
use crate::{Error, Result};

/// 2D force / gradient vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl std::ops::Add<Vec2> for Position {
    type Output = Position;
    fn add(self, rhs: Vec2) -> Position {
        Position::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Position {
    type Output = Vec2;
    fn sub(self, rhs: Position) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Cauchy potential parameters: boundary radius and a constant offset.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PotentialParams {
    pub r0: f64,
    pub phi0: f64,
}

impl PotentialParams {
    pub fn new(r0: f64, phi0: f64) -> Result<PotentialParams> {
        if !(r0 > 0.0) || !phi0.is_finite() {
            return Err(Error::InvalidConfig(format!("invalid potential (r0={r0}, phi0={phi0})")));
        }
        Ok(PotentialParams { r0, phi0 })
    }
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams { r0: 0.3, phi0: 0.0 }
    }
}

/// Cauchy (Lorentzian) potential: quadratic for `r << r0`, logarithmic for
/// `r >> r0`, with `phi(0) = 0`.
pub fn phi_cauchy(r: f64, r0: f64) -> f64 {
    let t = r / r0;
    0.5 * (1.0 + t * t).ln()
}

/// Potential of a single goal at `goal` evaluated at `p`.
pub fn elemental_energy(p: Position, goal: Position, params: &PotentialParams) -> f64 {
    phi_cauchy(p.distance(goal), params.r0) + params.phi0
}

/// Gradient of [`elemental_energy`] with respect to `p`:
/// `(p - goal) / (r0^2 + |p - goal|^2)`. Its norm is bounded by `1/(2 r0)`.
pub fn elemental_gradient(p: Position, goal: Position, params: &PotentialParams) -> Vec2 {
    let d = p - goal;
    let denom = params.r0 * params.r0 + d.x * d.x + d.y * d.y;
    d * (1.0 / denom)
}

/// Goal-probability-weighted mixture of elemental energies (one agent).
pub fn effective_energy(
    p: Position,
    dist: &[f64],
    board: &BoardLayout,
    params: &PotentialParams,
) -> f64 {
    dist.iter()
        .zip(board.goals())
        .map(|(&w, &g)| w * elemental_energy(p, g, params))
        .sum()
}

/// Gradient of [`effective_energy`].
pub fn effective_gradient(
    p: Position,
    dist: &[f64],
    board: &BoardLayout,
    params: &PotentialParams,
) -> Vec2 {
    let mut grad = Vec2::default();
    for (&w, &g) in dist.iter().zip(board.goals()) {
        grad += elemental_gradient(p, g, params) * w;
    }
    grad
}

/// Board, per-agent next-character distributions, and potential parameters
/// for one fixed context.
pub struct EnergyContext<'a> {
    board: &'a BoardLayout,
    dists: &'a [Vec<f64>],
    params: PotentialParams,
}

impl<'a> EnergyContext<'a> {
    /// Validates that there is at least one agent and that every distribution
    /// covers the alphabet and sums to one within 1e-9.
    pub fn new(
        board: &'a BoardLayout,
        dists: &'a [Vec<f64>],
        params: PotentialParams,
    ) -> Result<EnergyContext<'a>> {
        if dists.is_empty() {
            return Err(Error::InvalidConfig("energy context needs at least one agent".into()));
        }
        for dist in dists {
            if dist.len() != board.alphabet().len() {
                return Err(Error::ShapeMismatch {
                    left: dist.len(),
                    right: board.alphabet().len(),
                });
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized { sum });
            }
        }
        Ok(EnergyContext { board, dists, params })
    }

    pub fn board(&self) -> &BoardLayout {
        self.board
    }

    pub fn dists(&self) -> &[Vec<f64>] {
        self.dists
    }

    pub fn params(&self) -> PotentialParams {
        self.params
    }

    pub fn agent_count(&self) -> usize {
        self.dists.len()
    }

    /// Sum of the agents' effective energies at `p`.
    pub fn fused_energy(&self, p: Position) -> f64 {
        self.dists
            .iter()
            .map(|dist| effective_energy(p, dist, self.board, &self.params))
            .sum()
    }

    /// Gradient of the fused energy: the sum of per-agent gradients.
    pub fn fused_gradient(&self, p: Position) -> Vec2 {
        let mut grad = Vec2::default();
        for g in self.agent_gradients(p) {
            grad += g;
        }
        grad
    }

    /// Per-agent effective-energy gradients at `p`. The per-goal geometry is
    /// shared across agents, so the goal loop runs once.
    pub fn agent_gradients(&self, p: Position) -> Vec<Vec2> {
        let mut grads = vec![Vec2::default(); self.dists.len()];
        for (c, &goal) in self.board.goals().iter().enumerate() {
            let term = elemental_gradient(p, goal, &self.params);
            for (grad, dist) in grads.iter_mut().zip(self.dists) {
                *grad += term * dist[c];
            }
        }
        grads
    }
}
