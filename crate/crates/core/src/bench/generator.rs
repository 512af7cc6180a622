//! Random instances on grids and complete graphs.
//!
//! Node terms are independent standard normals, one per label. Every edge
//! has a zero diagonal and both off-diagonal entries equal to `λ`, where
//! `λ = σ|z|` with probability `α` and `λ = −σ|z|` otherwise, `z ~ N(0, 1)`.
//! With `λ ≥ 0` the edge is submodular, so `α = 1` gives a submodular model.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::energy::{EnergyModel, Graph};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    /// `N × N` grid with 4-nearest-neighbour edges.
    Grid,
    /// Complete graph on `N` vertices.
    Complete,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Grid => "grid",
            Topology::Complete => "complete",
        }
    }

    /// Node degree used to convert `σ·d` into `σ`: 4 on grids regardless of
    /// boundary vertices, `N − 1` on complete graphs.
    pub fn degree(self, n: usize) -> usize {
        match self {
            Topology::Grid => 4,
            Topology::Complete => n - 1,
        }
    }

    pub fn graph(self, n: usize) -> Result<Graph> {
        match self {
            Topology::Grid => Graph::grid(n, n),
            Topology::Complete => Graph::complete(n),
        }
    }

    fn code(self) -> u64 {
        match self {
            Topology::Grid => 1,
            Topology::Complete => 2,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Topology::Grid),
            "complete" => Ok(Topology::Complete),
            other => Err(Error::Config(format!("unknown topology `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub topology: Topology,
    /// Grid side length or complete-graph order.
    pub n: usize,
    /// Probability that an edge is submodular.
    pub alpha: f64,
    /// Interaction strength.
    pub sigma: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "N must be at least 2, got {}",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Configuration with `σ = sigma_d / d` for the topology's degree `d`.
    pub fn from_sigma_d(topology: Topology, n: usize, alpha: f64, sigma_d: f64, seed: u64) -> Self {
        let d = topology.degree(n.max(2)) as f64;
        Self {
            topology,
            n,
            alpha,
            sigma: sigma_d / d,
            seed,
        }
    }
}

/// Draws a model; the same configuration always yields the same model.
pub fn generate<T: Real>(cfg: &GeneratorConfig) -> Result<EnergyModel<T>> {
    cfg.validate()?;
    let graph = cfg.topology.graph(cfg.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = EnergyModel::zeros(graph);
    for th in model.params.node.iter_mut() {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        *th = [T::lit(a), T::lit(b)];
    }
    for tab in model.params.edge.iter_mut() {
        let u: f64 = rng.random();
        let z: f64 = rng.sample(StandardNormal);
        let magnitude = cfg.sigma * z.abs();
        let lambda = if u < cfg.alpha { magnitude } else { -magnitude };
        *tab = [[T::zero(), T::lit(lambda)], [T::lit(lambda), T::zero()]];
    }
    Ok(model)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial. It depends on the master seed, topology, size and
/// trial index but not on `α` or `σ`, so every point of a sweep curve sees
/// the same underlying random draws.
pub fn trial_seed(master: u64, topology: Topology, n: usize, trial: usize) -> u64 {
    let mut h = splitmix64(master);
    for word in [topology.code(), n as u64, trial as u64] {
        h = splitmix64(h ^ word);
    }
    h
}
