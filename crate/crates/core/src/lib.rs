//! Collective Langevin dynamics on a letter board.
//!
//! Several agents, each carrying a character n-gram language model, push a
//! shared planchette across a 2D board of symbol goals. Each agent's model
//! induces an energy landscape over the board; the agents' summed
//! gradient-plus-noise micro-actions make the planchette an unadjusted
//! Langevin sampler of the fused landscape, and nearest-goal voting turns its
//! trajectory into character sequences.
//!
//! Module map:
//! - [`alphabet`]: symbol set shared by boards and language models.
//! - [`board`]: goal geometry, clipping, nearest-goal quantization, Voronoi
//!   mass integration.
//! - [`lm`]: weighted-corpus n-gram training, product-of-experts fusion,
//!   log-likelihood and perplexity.
//! - [`energy`]: Cauchy potentials, effective/fused energies, analytic
//!   gradients.
//! - [`dynamics`]: per-agent actions, the collective update, inner-loop
//!   voting, and outer-loop sequence generation.
//! - [`oracle`]: grid Gibbs fields, empirical histograms, total variation,
//!   and character-mass product-of-experts checks.
//! - [`rng`]: deterministic seed derivation and per-agent noise streams.

pub mod alphabet;
pub mod board;
pub mod dynamics;
pub mod energy;
mod error;
pub mod lm;
pub mod oracle;
pub mod rng;

pub use alphabet::{Alphabet, Symbol};
pub use board::{BoardLayout, Bounds, Position};
pub use dynamics::{AgentSpec, DynamicsConfig, GenerationRecord, Mode, Trajectory};
pub use energy::{EnergyContext, PotentialParams, Vec2};
pub use error::Error;
pub use lm::{FusedCharModel, NgramModel, Vocabulary};
pub use oracle::{CharDistribution, GibbsField, Grid};

pub type Result<T> = std::result::Result<T, Error>;
