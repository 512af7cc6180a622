//! Repeated trials, parameter sweeps and their CSV output.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::generator::{generate, trial_seed, GeneratorConfig, Topology};
use crate::certificate::{fixed_vertices_by_threshold, FIX_THRESHOLD};
use crate::error::{Error, Result};
use crate::trw::{solve, SolverConfig};

/// Bumped whenever the CSV columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 12] = [
    "topology",
    "N",
    "alpha",
    "sigma_d",
    "seed",
    "trial",
    "p_cor",
    "bound",
    "wta",
    "passes",
    "fixed_count",
    "wall_ms",
];

/// One point of a sweep: everything but the trial index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialConfig {
    pub topology: Topology,
    pub n: usize,
    pub alpha: f64,
    pub sigma_d: f64,
    /// Master seed; each trial derives its own from it.
    pub seed: u64,
}

impl TrialConfig {
    pub fn generator(&self, trial: usize) -> GeneratorConfig {
        GeneratorConfig::from_sigma_d(
            self.topology,
            self.n,
            self.alpha,
            self.sigma_d,
            trial_seed(self.seed, self.topology, self.n, trial),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOptions {
    pub solver: SolverConfig<f64>,
    pub fix_threshold: f64,
    /// Record wall-clock time; when off, `wall_ms` is 0 so output is
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            fix_threshold: FIX_THRESHOLD,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub config: TrialConfig,
    pub trial: usize,
    /// Seed passed to the generator for this trial.
    pub instance_seed: u64,
    /// `fixed_count / vertex_count`.
    pub p_cor: f64,
    pub bound: f64,
    pub wta: bool,
    pub passes: usize,
    pub fixed_count: usize,
    pub vertex_count: usize,
    pub wall_ms: f64,
}

/// Runs one trial: generate, solve, count threshold-fixed vertices.
pub fn run_trial(config: &TrialConfig, trial: usize, opts: &TrialOptions) -> Result<TrialRecord> {
    let gen = config.generator(trial);
    let start = Instant::now();
    let model = generate::<f64>(&gen)?;
    let run = solve(&model, &opts.solver)?;
    let fixed = fixed_vertices_by_threshold(&run.theta_hat(), opts.fix_threshold);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let n = model.vertex_count();
    let fixed_count = fixed.fixed_count();
    Ok(TrialRecord {
        config: *config,
        trial,
        instance_seed: gen.seed,
        p_cor: fixed_count as f64 / n as f64,
        bound: run.report.final_bound(),
        wta: run.report.wta_reached,
        passes: run.report.passes_run,
        fixed_count,
        vertex_count: n,
        wall_ms: if opts.timing { elapsed } else { 0.0 },
    })
}

/// Runs `trials` independent trials in parallel; records come back in
/// trial order.
pub fn run_trials(
    config: &TrialConfig,
    trials: usize,
    opts: &TrialOptions,
) -> Result<Vec<TrialRecord>> {
    if trials < 1 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|trial| run_trial(config, trial, opts))
        .collect()
}

pub fn mean_p_cor(records: &[TrialRecord]) -> f64 {
    records.iter().map(|r| r.p_cor).sum::<f64>() / records.len() as f64
}

/// Axes of a sweep; every combination is run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxes {
    pub topologies: Vec<Topology>,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub sigma_ds: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepAxes {
    pub fn validate(&self) -> Result<()> {
        if self.topologies.is_empty()
            || self.sizes.is_empty()
            || self.alphas.is_empty()
            || self.sigma_ds.is_empty()
        {
            return Err(Error::Config(
                "every sweep axis needs at least one value".into(),
            ));
        }
        if self.trials < 1 {
            return Err(Error::Config("at least one trial is required".into()));
        }
        Ok(())
    }

    /// Points in (topology, N, α, σ·d) order.
    pub fn points(&self) -> Vec<TrialConfig> {
        let mut out = Vec::new();
        for &topology in &self.topologies {
            for &n in &self.sizes {
                for &alpha in &self.alphas {
                    for &sigma_d in &self.sigma_ds {
                        out.push(TrialConfig {
                            topology,
                            n,
                            alpha,
                            sigma_d,
                            seed: self.seed,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Figure panels: p_cor against σ·d for several sizes (a: grids at α = 0.5,
/// b: complete graphs at α = 0), or against α for several σ·d at one size
/// (c: grids, d: complete graphs).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Panel {
    A,
    B,
    C,
    D,
}

impl std::str::FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Panel::A),
            "b" => Ok(Panel::B),
            "c" => Ok(Panel::C),
            "d" => Ok(Panel::D),
            other => Err(Error::Config(format!("unknown panel `{other}`"))),
        }
    }
}

pub const GRID_SIGMA_D: [f64; 5] = [2.0, 4.0, 6.0, 8.0, 10.0];
pub const COMPLETE_SIGMA_D: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
pub const FULL_SIZES: [usize; 6] = [4, 8, 16, 32, 64, 128];

impl Panel {
    /// Sweep axes for the panel. Desk scale uses grids up to 16 and
    /// complete graphs up to 32 with size 16 for the α panels; `full` uses
    /// every size up to 128 and size 32 for the α panels.
    pub fn axes(self, full: bool, trials: usize, seed: u64) -> SweepAxes {
        let alphas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let (topologies, sizes, alphas, sigma_ds) = match self {
            Panel::A => (
                vec![Topology::Grid],
                if full {
                    FULL_SIZES.to_vec()
                } else {
                    vec![4, 8, 16]
                },
                vec![0.5],
                GRID_SIGMA_D.to_vec(),
            ),
            Panel::B => (
                vec![Topology::Complete],
                if full {
                    FULL_SIZES.to_vec()
                } else {
                    vec![4, 8, 16, 32]
                },
                vec![0.0],
                COMPLETE_SIGMA_D.to_vec(),
            ),
            Panel::C => (
                vec![Topology::Grid],
                vec![if full { 32 } else { 16 }],
                alphas,
                GRID_SIGMA_D.to_vec(),
            ),
            Panel::D => (
                vec![Topology::Complete],
                vec![if full { 32 } else { 16 }],
                alphas,
                COMPLETE_SIGMA_D.to_vec(),
            ),
        };
        SweepAxes {
            topologies,
            sizes,
            alphas,
            sigma_ds,
            trials,
            seed,
        }
    }
}

/// All trials at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub config: TrialConfig,
    pub records: Vec<TrialRecord>,
}

impl SweepCell {
    pub fn mean_p_cor(&self) -> f64 {
        mean_p_cor(&self.records)
    }
}

pub fn sweep(axes: &SweepAxes, opts: &TrialOptions) -> Result<Vec<SweepCell>> {
    axes.validate()?;
    let jobs: Vec<(usize, TrialConfig, usize)> = axes
        .points()
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| (0..axes.trials).map(move |t| (i, c, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(_, config, trial)| run_trial(&config, trial, opts))
        .collect::<Result<_>>()?;
    Ok(records
        .chunks(axes.trials)
        .map(|chunk| SweepCell {
            config: chunk[0].config,
            records: chunk.to_vec(),
        })
        .collect())
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    values.sum::<f64>() / count as f64
}

/// Writes one row per trial followed, for each sweep point, by a row whose
/// `trial` column is `mean` and whose numeric columns are averages (`wta`
/// becomes the fraction of trials that reached agreement).
pub fn write_csv<W: Write>(out: W, cells: &[SweepCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for cell in cells {
        for r in &cell.records {
            let c = &r.config;
            w.write_record([
                c.topology.to_string(),
                c.n.to_string(),
                c.alpha.to_string(),
                c.sigma_d.to_string(),
                r.instance_seed.to_string(),
                r.trial.to_string(),
                r.p_cor.to_string(),
                r.bound.to_string(),
                u8::from(r.wta).to_string(),
                r.passes.to_string(),
                r.fixed_count.to_string(),
                r.wall_ms.to_string(),
            ])?;
        }
    }
    for cell in cells {
        let c = &cell.config;
        let rs = &cell.records;
        let k = rs.len();
        w.write_record([
            c.topology.to_string(),
            c.n.to_string(),
            c.alpha.to_string(),
            c.sigma_d.to_string(),
            c.seed.to_string(),
            "mean".to_string(),
            mean(rs.iter().map(|r| r.p_cor), k).to_string(),
            mean(rs.iter().map(|r| r.bound), k).to_string(),
            mean(rs.iter().map(|r| f64::from(u8::from(r.wta))), k).to_string(),
            mean(rs.iter().map(|r| r.passes as f64), k).to_string(),
            mean(rs.iter().map(|r| r.fixed_count as f64), k).to_string(),
            mean(rs.iter().map(|r| r.wall_ms), k).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
