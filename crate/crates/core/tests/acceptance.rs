//! End-to-end acceptance checks against the exhaustive oracle.
//!
//! Runs as a plain binary so the summary (one PASS/FAIL line per criterion)
//! is always printed; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use binmrf::bench::{
    generate, mean_p_cor, run_trials, trial_seed, GeneratorConfig, Topology, TrialConfig,
    TrialOptions,
};
use binmrf::certificate::{
    dual_solution, fixed_vertices, fixed_vertices_by_threshold, min_marginal_gap,
    submodular_labelings, verify_global_optimality, verify_local_polytope,
};
use binmrf::energy::check_reparameterization;
use binmrf::tree::{
    decode_tree_optimum, to_canonical_normal_form, tree_min_marginals, tree_min_value,
};
use binmrf::{
    brute_solve, combine, solve, verify_weak_persistency, EnergyModel, Graph, OracleResult,
    SolverConfig, SolverRun, Tree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const MASTER_SEED: u64 = 20_240_601;

struct Solved {
    label: String,
    model: EnergyModel,
    run: SolverRun,
    oracle: OracleResult,
}

fn corpus_configs() -> Vec<GeneratorConfig> {
    let shapes = [
        (Topology::Grid, 3),
        (Topology::Grid, 4),
        (Topology::Complete, 4),
        (Topology::Complete, 5),
        (Topology::Complete, 6),
    ];
    let mut out = Vec::new();
    for (topology, n) in shapes {
        for alpha in [0.0, 0.5, 1.0] {
            for sigma_d in [1.0, 5.0] {
                for trial in 0..17 {
                    let seed = trial_seed(MASTER_SEED, topology, n, trial);
                    out.push(GeneratorConfig::from_sigma_d(
                        topology, n, alpha, sigma_d, seed,
                    ));
                }
            }
        }
    }
    out
}

fn label(c: &GeneratorConfig) -> String {
    format!(
        "{} N={} alpha={} sigma={:.4} seed={}",
        c.topology, c.n, c.alpha, c.sigma, c.seed
    )
}

fn solve_corpus(configs: &[GeneratorConfig]) -> Result<Vec<Solved>, String> {
    configs
        .par_iter()
        .map(|c| {
            let model: EnergyModel = generate(c).map_err(|e| e.to_string())?;
            let run = solve(&model, &SolverConfig::default())
                .map_err(|e| format!("{}: {e}", label(c)))?;
            let oracle = brute_solve(&model, 20).map_err(|e| e.to_string())?;
            Ok(Solved {
                label: label(c),
                model,
                run,
                oracle,
            })
        })
        .collect()
}

type Outcome = Result<String, String>;

fn first_failure(
    corpus: &[Solved],
    check: impl Fn(&Solved) -> Result<(), String> + Sync,
) -> Option<String> {
    corpus
        .par_iter()
        .find_map_first(|s| check(s).err().map(|e| format!("{}: {e}", s.label)))
}

fn bound_monotonicity(corpus: &[Solved], elapsed: Duration) -> Outcome {
    let bad = first_failure(corpus, |s| {
        let h = &s.run.report.bound_history;
        let mut prev = s.run.report.initial_bound;
        for (i, &b) in h.iter().enumerate() {
            if b < prev - 1e-12 {
                return Err(format!("pass {} bound {b} below {prev}", i + 1));
            }
            prev = b;
        }
        Ok(())
    });
    match bad {
        Some(e) => Err(e),
        None if elapsed >= Duration::from_secs(60) => {
            Err(format!("runtime {elapsed:?} exceeds one minute"))
        }
        None => Ok(format!(
            "{} instances, solved in {:.1}s",
            corpus.len(),
            elapsed.as_secs_f64()
        )),
    }
}

fn bound_validity(corpus: &[Solved]) -> Outcome {
    match first_failure(corpus, |s| {
        let b = s.run.report.final_bound();
        if b <= s.oracle.min_energy + 1e-9 {
            Ok(())
        } else {
            Err(format!("bound {b} above minimum {}", s.oracle.min_energy))
        }
    }) {
        Some(e) => Err(e),
        None => Ok(format!("{} instances", corpus.len())),
    }
}

fn weak_persistency(corpus: &[Solved]) -> Outcome {
    let bad = first_failure(corpus, |s| {
        let threshold = fixed_vertices_by_threshold(&s.run.theta_hat(), 1e-6);
        let mut partials = vec![("threshold", threshold)];
        if s.run.wta.reached {
            partials.push(("local-set", fixed_vertices(&s.run.wta.sets)));
        }
        for (kind, p) in partials {
            let check =
                verify_weak_persistency(&s.model, p.as_slice(), 20).map_err(|e| e.to_string())?;
            if !check.holds {
                return Err(format!(
                    "{kind} fixing ({} vertices) raises the minimum {} to {}",
                    p.fixed_count(),
                    check.global_min,
                    check.constrained_min
                ));
            }
        }
        Ok(())
    });
    match bad {
        Some(e) => Err(e),
        None => {
            let wta = corpus.iter().filter(|s| s.run.wta.reached).count();
            Ok(format!("{} instances ({wta} at agreement)", corpus.len()))
        }
    }
}

fn submodular_exactness() -> Outcome {
    let mut configs = Vec::new();
    for (topology, sizes) in [
        (Topology::Grid, vec![3, 4]),
        (Topology::Complete, vec![4, 6, 8, 12]),
    ] {
        for trial in 0..100 {
            let n = sizes[trial % sizes.len()];
            let sigma_d = [1.0, 3.0, 5.0, 10.0][trial % 4];
            let seed = trial_seed(MASTER_SEED ^ 0x5b, topology, n, trial);
            configs.push(GeneratorConfig::from_sigma_d(
                topology, n, 1.0, sigma_d, seed,
            ));
        }
    }
    let corpus = solve_corpus(&configs)?;
    let bad = first_failure(&corpus, |s| {
        if !s.run.wta.reached {
            return Err("agreement not reached".into());
        }
        let partial = fixed_vertices(&s.run.wta.sets);
        let (x, y) = submodular_labelings(&s.model, &partial).map_err(|e| e.to_string())?;
        for (name, z) in [("x", x), ("y", y)] {
            let e = s.model.evaluate(&z).map_err(|e| e.to_string())?;
            if (e - s.oracle.min_energy).abs() > 1e-7 {
                return Err(format!(
                    "completion {name} has energy {e}, minimum {}",
                    s.oracle.min_energy
                ));
            }
        }
        let fixed = fixed_vertices_by_threshold(&s.run.theta_hat(), 1e-6).fixed_count();
        if fixed != s.model.vertex_count() {
            return Err(format!("p_cor = {fixed}/{}", s.model.vertex_count()));
        }
        Ok(())
    });
    match bad {
        Some(e) => Err(e),
        None => Ok(format!("{} submodular instances", corpus.len())),
    }
}

fn dual_certificate(corpus: &[Solved]) -> Outcome {
    let bad = first_failure(corpus, |s| {
        if !s.run.wta.reached {
            return Ok(());
        }
        let tau = dual_solution(&s.model.graph, &s.run.wta.sets).map_err(|e| e.to_string())?;
        let violations = verify_local_polytope(&tau, &s.model.graph);
        if !violations.is_empty() {
            return Err(format!("infeasible dual: {}", violations[0]));
        }
        let check =
            verify_global_optimality(&s.model, &s.run.collection, &s.run.decomposition, &tau)
                .map_err(|e| e.to_string())?;
        if (check.primal - check.dual).abs() > 1e-7 {
            return Err(format!("primal {} dual {}", check.primal, check.dual));
        }
        Ok(())
    });
    match bad {
        Some(e) => Err(e),
        None => Ok(format!(
            "{} fixed points",
            corpus.iter().filter(|s| s.run.wta.reached).count()
        )),
    }
}

fn min_marginal_gaps(corpus: &[Solved]) -> Outcome {
    let small: Vec<&Solved> = corpus
        .iter()
        .filter(|s| s.model.vertex_count() <= 12)
        .collect();
    let checked: usize = small
        .iter()
        .filter(|s| s.run.wta.reached)
        .map(|s| fixed_vertices(&s.run.wta.sets).fixed_count())
        .sum();
    let bad = small.par_iter().find_map_first(|s| {
        if !s.run.wta.reached {
            return None;
        }
        let partial = fixed_vertices(&s.run.wta.sets);
        for (v, j) in partial.fixed() {
            let c = min_marginal_gap(&s.run.collection, &s.run.decomposition, &partial, v).ok()?;
            let other = s.oracle.node_min_marginals[v][1 - j as usize] - s.oracle.min_energy;
            if other < c - 1e-9 {
                return Some(format!("{}: vertex {v} gap {c} exceeds {other}", s.label));
            }
            if c > 1e-8 && s.oracle.optima.iter().any(|x| x.get(v) != j) {
                return Some(format!(
                    "{}: vertex {v} gap {c} but an optimum disagrees",
                    s.label
                ));
            }
        }
        None
    });
    match bad {
        Some(e) => Err(e),
        None => Ok(format!(
            "{checked} fixed vertices on {} instances",
            small.len()
        )),
    }
}

fn random_tree(rng: &mut ChaCha8Rng) -> (EnergyModel, Tree) {
    let n = rng.random_range(1..=12);
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    let graph = Graph::new(n, edges).unwrap();
    let mut m = EnergyModel::zeros(graph);
    m.params.const_term = rng.random_range(-1.0..1.0);
    for th in m.params.node.iter_mut() {
        *th = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
    }
    for tab in m.params.edge.iter_mut() {
        for row in tab.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.random_range(-2.0..2.0);
            }
        }
    }
    let all: Vec<usize> = (0..m.graph.edge_count()).collect();
    let tree = Tree::from_edges(&m.graph, &all, (n == 1).then_some(0)).unwrap();
    (m, tree)
}

fn tree_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    for i in 0..200 {
        let (m, tree) = random_tree(&mut rng);
        let oracle = brute_solve(&m, 20).map_err(|e| e.to_string())?;
        let canonical = to_canonical_normal_form(&tree, &m.params).map_err(|e| e.to_string())?;
        let value = tree_min_value(&tree, &canonical).map_err(|e| e.to_string())?;
        if (value - oracle.min_energy).abs() > 1e-9 {
            return Err(format!(
                "tree {i}: minimum {value} vs {}",
                oracle.min_energy
            ));
        }
        let mm = tree_min_marginals(&m.graph, &tree, &m.params).map_err(|e| e.to_string())?;
        for s in 0..m.vertex_count() {
            for j in 0..2 {
                if (mm.node[s][j] - oracle.node_min_marginals[s][j]).abs() > 1e-9 {
                    return Err(format!("tree {i}: node marginal ({s}, {j})"));
                }
            }
        }
        for e in 0..m.graph.edge_count() {
            for j in 0..2 {
                for k in 0..2 {
                    if (mm.edge[e][j][k] - oracle.edge_min_marginals[e][j][k]).abs() > 1e-9 {
                        return Err(format!("tree {i}: edge marginal ({e}, {j}{k})"));
                    }
                }
            }
        }
        let x = decode_tree_optimum(&tree, &m.params).map_err(|e| e.to_string())?;
        let e = m.evaluate(&x).map_err(|e| e.to_string())?;
        if (e - oracle.min_energy).abs() > 1e-9 {
            return Err(format!(
                "tree {i}: decoded energy {e} vs {}",
                oracle.min_energy
            ));
        }
    }
    Ok("200 random trees".into())
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn stats_at(
    topology: Topology,
    n: usize,
    alpha: f64,
    sigma_d: f64,
    trials: usize,
) -> Result<(f64, f64), String> {
    let config = TrialConfig {
        topology,
        n,
        alpha,
        sigma_d,
        seed: MASTER_SEED,
    };
    let records =
        run_trials(&config, trials, &TrialOptions::default()).map_err(|e| e.to_string())?;
    let mean = mean_p_cor(&records);
    let var = records
        .iter()
        .map(|r| (r.p_cor - mean).powi(2))
        .sum::<f64>()
        / (records.len() - 1) as f64;
    Ok((mean, var.sqrt()))
}

fn mean_at(
    topology: Topology,
    n: usize,
    alpha: f64,
    sigma_d: f64,
    trials: usize,
) -> Result<f64, String> {
    Ok(stats_at(topology, n, alpha, sigma_d, trials)?.0)
}

fn figure_shape() -> Outcome {
    let start = Instant::now();
    let trials = 100;
    let mut notes = Vec::new();

    // (a) and (b): p_cor against σ·d at the hardest α for each topology.
    let curves = [
        (
            Topology::Grid,
            vec![4, 8, 16],
            0.5,
            vec![2.0, 4.0, 6.0, 8.0, 10.0],
        ),
        (
            Topology::Complete,
            vec![4, 8, 16, 32],
            0.0,
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
        ),
    ];
    let mut low_worst: f64 = 1.0;
    let mut rho_worst: f64 = -1.0;
    for (topology, sizes, alpha, sigma_ds) in &curves {
        for &n in sizes {
            let means: Vec<f64> = sigma_ds
                .iter()
                .map(|&sd| mean_at(*topology, n, *alpha, sd, trials))
                .collect::<Result<_, _>>()?;
            if means[0] < 0.95 {
                return Err(format!(
                    "(a) {topology} N={n}: mean p_cor {} at sigma_d {}",
                    means[0], sigma_ds[0]
                ));
            }
            let rho = spearman(sigma_ds, &means);
            if rho > 0.0 {
                return Err(format!(
                    "(b) {topology} N={n}: Spearman {rho} over {means:?}"
                ));
            }
            low_worst = low_worst.min(means[0]);
            rho_worst = rho_worst.max(rho);
        }
    }
    notes.push(format!("(a) min p_cor {low_worst:.4}"));
    notes.push(format!("(b) max Spearman {rho_worst:.3}"));

    // (c): α = 1 fixes every vertex.
    for (topology, n, sd) in [(Topology::Grid, 8, 10.0), (Topology::Complete, 16, 5.0)] {
        let p = mean_at(topology, n, 1.0, sd, trials)?;
        if p != 1.0 {
            return Err(format!("(c) {topology} N={n}: mean p_cor {p} at alpha 1"));
        }
    }
    notes.push("(c) p_cor = 1 at alpha 1".into());

    // (d): grids are symmetric under α ↔ 1 − α. Every pair is compared at
    // the α-panel size; the z-score of each difference is reported too.
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut misses = Vec::new();
    let mut pairs = 0;
    for alpha in [0.0, 0.1, 0.2, 0.3, 0.4] {
        for sd in [2.0, 6.0, 10.0] {
            let (p, sp) = stats_at(Topology::Grid, 16, alpha, sd, trials)?;
            let (q, sq) = stats_at(Topology::Grid, 16, 1.0 - alpha, sd, trials)?;
            let se = ((sp * sp + sq * sq) / trials as f64).sqrt();
            let z = if se > 0.0 { (p - q) / se } else { 0.0 };
            pairs += 1;
            worst = worst.max((p - q).abs());
            worst_z = worst_z.max(z.abs());
            if (p - q).abs() >= 0.03 {
                misses.push(format!(
                    "alpha {alpha} vs {} at sigma_d {sd}: {:.2} pp (z = {z:.2})",
                    1.0 - alpha,
                    100.0 * (p - q).abs()
                ));
            }
        }
    }
    if !misses.is_empty() {
        return Err(format!(
            "{}, (d) {} of {pairs} pairs differ by 3 pp or more: {}; largest |z| over all pairs {worst_z:.2}",
            notes.join(", "),
            misses.len(),
            misses.join("; ")
        ));
    }
    notes.push(format!(
        "(d) max asymmetry {:.2} pp, max |z| {worst_z:.2}",
        100.0 * worst
    ));

    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(600) {
        return Err(format!("runtime {elapsed:?} exceeds ten minutes"));
    }
    notes.push(format!("{:.1}s", elapsed.as_secs_f64()));
    Ok(notes.join(", "))
}

fn reparameterization(corpus: &[Solved]) -> Outcome {
    let bad = first_failure(corpus, |s| {
        let g = &s.model.graph;
        let hat = combine(&s.run.collection, &s.run.decomposition, g).map_err(|e| e.to_string())?;
        let hat = EnergyModel::new(g.clone(), hat).map_err(|e| e.to_string())?;
        for (e, (a, b)) in s
            .model
            .edge_invariants()
            .iter()
            .zip(hat.edge_invariants())
            .enumerate()
        {
            if (a - b).abs() > 1e-9 {
                return Err(format!("edge {e} invariant {a} became {b}"));
            }
        }
        if g.vertex_count() <= 12
            && !check_reparameterization(&s.model, &hat, 12, 1e-9).map_err(|e| e.to_string())?
        {
            return Err("energies differ on some assignment".into());
        }
        Ok(())
    });
    match bad {
        Some(e) => Err(e),
        None => Ok(format!("{} instances", corpus.len())),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus = match solve_corpus(&corpus_configs()) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL corpus: {e}");
            return ExitCode::FAILURE;
        }
    };
    let solve_time = start.elapsed();

    let results: Vec<(&str, Outcome)> = vec![
        (
            "1 bound monotonicity",
            bound_monotonicity(&corpus, solve_time),
        ),
        ("2 lower-bound validity", bound_validity(&corpus)),
        ("3 weak persistency", weak_persistency(&corpus)),
        ("4 submodular exactness", submodular_exactness()),
        ("5 dual certificate", dual_certificate(&corpus)),
        ("6 min-marginal gaps", min_marginal_gaps(&corpus)),
        ("7 tree exactness", tree_exactness()),
        ("8 p_cor curve shape", figure_shape()),
        ("9 reparameterization", reparameterization(&corpus)),
    ];
    let mut failed = 0;
    println!();
    for (name, outcome) in &results {
        match outcome {
            Ok(note) => println!("PASS criterion {name}: {note}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
