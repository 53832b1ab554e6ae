//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line to
//! stderr (uncaptured) before asserting.
//!
//! The weighted-centrality accuracy run uses a shorter series than the sweep
//! default so it finishes on a single core; set `RMVG_ACCEPTANCE_TMAX` to
//! change it (2600 is the sweep default).

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rmvg::report;
use rmvg::runner::{AccuracyOutput, MemoryOutput, Runner};
use rmvg_core::esn::{self, Reservoir, ReservoirParams, StateTrajectory};
use rmvg_core::graph_metrics::{self, VertexPropertyKind};
use rmvg_core::hvg::{self, Mode, VisibilityGraph};
use rmvg_core::memory::{DelayWindow, Kernel};
use rmvg_core::multiplex::{self, Multiplex};
use rmvg_core::nalgebra::{DMatrix, DVector};
use rmvg_core::signals::gen_noise;
use rmvg_core::sweep::{AccuracyConfig, Measure, MemoryConfig, MemoryMeasure};
use rmvg_core::Task;

const SEED: u64 = 1;
const DEFAULT_TMAX: usize = 700;

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n} [{tag}] {name}: {detail}");
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn brute_force_edges(x: &[f64]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let floor = x[i].min(x[j]);
            if x[i + 1..j].iter().all(|&v| v < floor) {
                out.push((i as u32, j as u32));
            }
        }
    }
    out
}

fn random_series(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(2..=64);
    match rng.gen_range(0..4) {
        0 => (0..n).map(|_| rng.gen::<f64>()).collect(),
        // few distinct levels: many ties
        1 => (0..n).map(|_| rng.gen_range(0..4) as f64).collect(),
        // plateaus of random length
        2 => {
            let mut v = Vec::with_capacity(n);
            while v.len() < n {
                let level = rng.gen_range(0..6) as f64;
                let run = rng.gen_range(1..6);
                v.extend(std::iter::repeat(level).take(run.min(n - v.len())));
            }
            v
        }
        _ => vec![rng.gen::<f64>(); n],
    }
}

#[test]
fn criterion_1_hvg_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let series: Vec<Vec<f64>> = (0..1000).map(|_| random_series(&mut rng)).collect();
    let start = Instant::now();
    let mut mismatches = 0;
    for x in &series {
        let g = hvg::build_hvg(x, Mode::Binary).unwrap();
        if g.edges() != brute_force_edges(x).as_slice() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        1,
        "HVG oracle equivalence",
        mismatches == 0 && elapsed < 10.0,
        &format!("{mismatches} mismatches over 1000 series, {elapsed:.2} s"),
    );
}

struct NoiseGraph {
    graph: VisibilityGraph,
    build_secs: f64,
}

fn noise_graph() -> &'static NoiseGraph {
    static GRAPH: OnceLock<NoiseGraph> = OnceLock::new();
    GRAPH.get_or_init(|| {
        let start = Instant::now();
        let x = gen_noise(100_000, 0.0, 1.0, SEED).unwrap();
        let graph = hvg::build_hvg(x.values(), Mode::Binary).unwrap();
        NoiseGraph { graph, build_secs: start.elapsed().as_secs_f64() }
    })
}

#[test]
fn criterion_2_iid_degree_law() {
    let ng = noise_graph();
    let start = Instant::now();
    let law = hvg::degree_law(&ng.graph);
    let elapsed = ng.build_secs + start.elapsed().as_secs_f64();
    let p2 = law.p(2);
    verdict(
        2,
        "i.i.d. degree law",
        (law.mean - 4.0).abs() <= 0.05 && (p2 - 1.0 / 3.0).abs() <= 0.02 && elapsed < 30.0,
        &format!("mean degree {:.4}, P(2) = {p2:.4}, {elapsed:.2} s", law.mean),
    );
}

#[test]
fn criterion_3_clustering_degree_bound() {
    let g = &noise_graph().graph;
    let cl = graph_metrics::clusterings(g);
    let dg = graph_metrics::degrees(g);
    let products: Vec<f64> = cl.iter().zip(&dg).map(|(c, d)| c * d).collect();
    let max = products.iter().copied().fold(0.0, f64::max);
    let mean = products.iter().sum::<f64>() / products.len() as f64;

    // same product with the neighborhood excluding the vertex itself
    let mut open_max = 0.0f64;
    for v in 0..g.vertex_count() {
        let nb = g.neighbors(v);
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let links = nb
            .iter()
            .enumerate()
            .flat_map(|(a, &i)| nb[a + 1..].iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| g.neighbors(i as usize).binary_search(&j).is_ok())
            .count();
        open_max = open_max.max(2.0 * links as f64 / (k - 1) as f64);
    }
    verdict(
        3,
        "clustering bound",
        max <= 2.1,
        &format!(
            "max CL*DG = {max:.4}, mean {mean:.4} (neighborhood without the vertex: max {open_max:.4})"
        ),
    );
}

#[test]
fn criterion_4_heterogeneity_null() {
    let x = gen_noise(400, -1.0, 1.0, SEED).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for mode in [Mode::Binary, Mode::Weighted] {
        let layer = hvg::build_hvg(x.values(), mode).unwrap();
        let m = Multiplex::from_layers(vec![layer; 12]).unwrap();
        let h = multiplex::heterogeneity_many(&m, &VertexPropertyKind::ALL, 50).unwrap();
        for r in &h {
            pass &= r.mean == 0.0;
            details.push(format!("H_{}_{} = {}", r.kind.tag(), mode.name(), r.mean));
        }
        let overlap = multiplex::aeo(&m).unwrap();
        pass &= overlap == 1.0;
        details.push(format!("AEO_{} = {overlap}", mode.name()));
    }
    verdict(4, "heterogeneity null", pass, &details.join(", "));
}

fn poly_config() -> AccuracyConfig {
    let mut cfg = AccuracyConfig::desk(Task::poly(), SEED);
    cfg.measures = ["H_DG_b", "H_CL_b", "H_DG_w", "H_CL_w", "AEO", "IMI"]
        .iter()
        .map(|m| Measure::parse(m).unwrap())
        .collect();
    cfg
}

fn poly_single_thread() -> &'static AccuracyOutput {
    static OUT: OnceLock<AccuracyOutput> = OnceLock::new();
    OUT.get_or_init(|| Runner::new(1).accuracy(&poly_config()).unwrap())
}

fn mso_tmax() -> usize {
    std::env::var("RMVG_ACCEPTANCE_TMAX").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_TMAX)
}

#[test]
fn criterion_5_accuracy_correlations() {
    let start = Instant::now();
    let poly = poly_single_thread();
    let poly_cl = poly.report.r("H_CL", "b");

    let mut mso_cfg = AccuracyConfig::desk(Task::Mso, SEED);
    mso_cfg.length = mso_tmax();
    mso_cfg.measures = vec![
        Measure::Heterogeneity(VertexPropertyKind::Betweenness, Mode::Weighted),
        Measure::Heterogeneity(VertexPropertyKind::Clustering, Mode::Weighted),
    ];
    let threads = rmvg::runner::thread_count(None);
    let mso = Runner::new(threads).accuracy(&mso_cfg).unwrap();
    let mso_bc = mso.report.r("H_BC", "w");
    let mso_cl = mso.report.r("H_CL", "w");

    let ok = |r: Option<f64>| r.is_some_and(|r| r >= 0.4);
    let show = |r: Option<f64>| r.map_or("undefined".to_string(), |r| format!("{r:.3}"));
    verdict(
        5,
        "accuracy-correlation reproduction",
        ok(poly_cl) && ok(mso_bc) && ok(mso_cl),
        &format!(
            "POLY r(gamma, H_CL b) = {}; MSO (t_max {}) r(gamma, H_BC w) = {}, r(gamma, H_CL w) = {}; {:.0} s",
            show(poly_cl),
            mso_cfg.length,
            show(mso_bc),
            show(mso_cl),
            start.elapsed().as_secs_f64()
        ),
    );
}

fn memory_single_thread() -> &'static MemoryOutput {
    static OUT: OnceLock<MemoryOutput> = OnceLock::new();
    OUT.get_or_init(|| Runner::new(1).memory(&MemoryConfig::desk(SEED)).unwrap())
}

#[test]
fn criterion_6_memory_correlations() {
    let start = Instant::now();
    let out = memory_single_thread();
    let window = DelayWindow::new(20, 15).unwrap();
    let mode = window.to_string();
    let dg = out.report.r(&MemoryMeasure::Degree(Kernel::Spearman).column(), &mode);
    let ts = out.report.r(&MemoryMeasure::Series(Kernel::Pearson).column(), &mode);
    let pass = match (dg, ts) {
        (Some(dg), Some(ts)) => dg >= 0.5 && dg > ts,
        _ => false,
    };
    verdict(
        6,
        "memory-correlation reproduction",
        pass,
        &format!(
            "window {mode}: r(delta_dg sc, MC) = {dg:?}, r(delta_ts pc, MC) = {ts:?}; {:.0} s",
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Input neuron followed by `stages` identity delay stages.
fn shift_register(stages: usize, input_scaling: f64) -> Reservoir {
    let n = stages + 1;
    let w = DMatrix::from_fn(n, n, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
    let mut w_in = DVector::zeros(n);
    w_in[0] = input_scaling;
    Reservoir::from_weights(w, w_in).unwrap()
}

#[test]
fn criterion_7_memory_capacity_sanity() {
    let noise = gen_noise(2600, -1.0, 1.0, SEED).unwrap();
    let lags: Vec<usize> = (1..=40).collect();
    let register = shift_register(10, 0.01);
    let mc_register = esn::memory_capacity(&register, &noise, &lags, 1e-10, 100).unwrap().total;
    let still = Reservoir::random(&ReservoirParams::new(100, 0.0, 0.7, SEED)).unwrap();
    let mc_still = esn::memory_capacity(&still, &noise, &lags, esn::DEFAULT_REG, 100).unwrap().total;
    verdict(
        7,
        "memory capacity sanity",
        (mc_register - 10.0).abs() <= 0.5 && mc_still < 1.5,
        &format!("shift register MC = {mc_register:.4}, zero-radius MC = {mc_still:.4}"),
    );
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

#[test]
fn criterion_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let raw = |name: &str| dir.path().join(name).join(report::RAW_FILE);
    let mut checks = Vec::new();

    report::write_accuracy(&dir.path().join("poly1"), poly_single_thread(), false).unwrap();
    let poly8 = Runner::new(8).accuracy(&poly_config()).unwrap();
    report::write_accuracy(&dir.path().join("poly8"), &poly8, false).unwrap();
    checks.push(("POLY accuracy sweep", same_bytes(&raw("poly1"), &raw("poly8"))));

    report::write_memory(&dir.path().join("mem1"), memory_single_thread()).unwrap();
    let mem8 = Runner::new(8).memory(&MemoryConfig::desk(SEED)).unwrap();
    report::write_memory(&dir.path().join("mem8"), &mem8).unwrap();
    checks.push(("memory sweep", same_bytes(&raw("mem1"), &raw("mem8"))));

    // every measure, including both centralities in both modes, on a small grid
    let mut all = AccuracyConfig::desk(Task::Mso, SEED);
    all.rhos = vec![0.7, 1.1];
    all.omegas = vec![0.3, 0.8];
    all.trials = 2;
    all.size = 20;
    all.length = 500;
    for (name, threads) in [("all1", 1), ("all8", 8)] {
        let out = Runner::new(threads).accuracy(&all).unwrap();
        report::write_accuracy(&dir.path().join(name), &out, false).unwrap();
    }
    checks.push(("all-measure sweep", same_bytes(&raw("all1"), &raw("all8"))));

    let pass = checks.iter().all(|c| c.1);
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, same)| format!("{name} {}", if *same { "identical" } else { "DIFFERENT" }))
        .collect();
    verdict(8, "determinism across thread counts", pass, &detail.join(", "));
}

fn sigma_min_oracle(w: &DMatrix<f64>) -> f64 {
    let gram = w.transpose() * w;
    gram.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

#[test]
fn criterion_9_lambda_baseline() {
    let res = Reservoir::random(&ReservoirParams::new(100, 0.9, 0.5, SEED)).unwrap();
    let zeros = vec![vec![0.0; 60]; 100];
    let traj = StateTrajectory::from_series(&zeros, 10).unwrap();
    let lambda = esn::jacobian_lambda(&traj, res.recurrent()).unwrap();
    let expected = sigma_min_oracle(res.recurrent());
    let zero_ok = (lambda - expected).abs() <= 1e-9;

    let mut cfg = AccuracyConfig::desk(Task::Mso, SEED);
    cfg.omegas = vec![0.5];
    cfg.trials = 1;
    cfg.measures = vec![Measure::Lambda];
    let out = Runner::new(rmvg::runner::thread_count(None)).accuracy(&cfg).unwrap();
    let values = &out.result.measure("lambda", "").unwrap().values;
    let sweep_ok = values.iter().all(|v| v.is_finite() && *v > 0.0);
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    verdict(
        9,
        "lambda baseline",
        zero_ok && sweep_ok,
        &format!(
            "zero trajectory {lambda:.12} vs {expected:.12}; MSO radius sweep over {} cells in [{lo:.4}, {hi:.4}]",
            values.len()
        ),
    );
}
