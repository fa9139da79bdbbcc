//! Verification suites: each quantified claim becomes a check with a
//! named tolerance, run over enumerated graph/parameter grids. The CLI
//! `verify` subcommand and the acceptance tests both drive these.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bounds;
use crate::dynamics::{
    sb_matrix, sb_step, sw_matrix, sw_step, DynamicsKind, RngState, StochasticMatrix,
};
use crate::error::{Error, Result};
use crate::graph::{enumerate_connected_graphs, EdgeSubset, Graph};
use crate::joint::{counting_identity_violation, verify_lemma_properties, verify_representation};
use crate::models::{fkes_distribution, potts_distribution, rc_distribution, ModelParams};
use crate::spectral::{exact_mixing_time, mu_min_lower_bound, sandwich_bounds_from, spectral_gap};
use crate::Caps;

/// Outcome of one quantified check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, max_violation: f64, tolerance: f64) -> Self {
        CheckReport {
            check: check.into(),
            max_violation,
            tolerance,
            pass: max_violation <= tolerance,
        }
    }
}

/// Grid over which the sweep suites run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub max_vertices: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            ps: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            qs: vec![2.0, 3.0],
            max_vertices: 4,
        }
    }
}

impl SuiteConfig {
    /// Restricts the grid to a single q; q > 3 shrinks the graph family
    /// to |V| <= 3 to keep the joint spaces enumerable.
    pub fn with_q(q: f64) -> Self {
        SuiteConfig {
            ps: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            qs: vec![q],
            max_vertices: if q > 3.0 { 3 } else { 4 },
        }
    }
}

pub const SUITE_NAMES: [&str; 10] = [
    "theorem",
    "representation",
    "properties",
    "marginals",
    "tree",
    "sandwich",
    "mixing",
    "sampler",
    "width",
    "bounds",
];

pub fn run_suite(name: &str, cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    match name {
        "theorem" => theorem_suite(cfg, caps),
        "representation" => representation_suite(cfg, caps),
        "properties" => properties_suite(cfg, caps),
        "marginals" => marginals_suite(cfg, caps),
        "tree" => tree_suite(cfg, caps),
        "sandwich" => sandwich_suite(cfg, caps),
        "mixing" => mixing_suite(cfg, caps),
        "sampler" => sampler_suite(caps),
        "width" => width_suite(cfg, caps),
        "bounds" => bounds_suite(cfg, caps),
        _ => Err(Error::parameter(format!("unknown suite '{name}'"))),
    }
}

fn grid_points(cfg: &SuiteConfig) -> Result<Vec<(usize, Graph, f64, f64)>> {
    let graphs = enumerate_connected_graphs(cfg.max_vertices)?;
    let mut points = Vec::new();
    for (gi, g) in graphs.into_iter().enumerate() {
        for &p in &cfg.ps {
            for &q in &cfg.qs {
                points.push((gi, g.clone(), p, q));
            }
        }
    }
    Ok(points)
}

fn point_tag(gi: usize, g: &Graph, p: f64, q: f64) -> String {
    format!("g{gi}(n={},m={}) p={p} q={q}", g.n_vertices(), g.n_edges())
}

/// Main gap comparison: gap(SW) >= gap(SB) on every connected labeled
/// graph in the grid, for both the lazy and non-lazy single-bond chain.
pub fn theorem_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (gi, g, p, q) in grid_points(cfg)? {
        let params = ModelParams::new(p, q)?;
        let gap_sw = spectral_gap(&sw_matrix(&g, &params, caps)?, caps)?.gap;
        for lazy in [true, false] {
            let gap_sb = spectral_gap(&sb_matrix(&g, &params, lazy, caps)?, caps)?.gap;
            let tag = point_tag(gi, &g, p, q);
            let kind = if lazy { "lazy" } else { "nonlazy" };
            reports.push(CheckReport::new(
                format!("theorem {tag} {kind}"),
                (gap_sb - gap_sw).max(0.0),
                1e-9,
            ));
        }
    }
    Ok(reports)
}

fn fixtures() -> Vec<(&'static str, Graph)> {
    vec![
        ("K2", Graph::path(2).unwrap()),
        ("path4", Graph::path(4).unwrap()),
        ("triangle", Graph::cycle(3).unwrap()),
    ]
}

const FIXTURE_PS: [f64; 3] = [0.2, 0.5, 0.8];

/// P_SW = M (prod T_e) M* and P_e = M T_e M*, entrywise.
pub fn representation_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (name, g) in fixtures() {
        if g.n_vertices() > cfg.max_vertices {
            continue;
        }
        for &q in &cfg.qs {
            for p in FIXTURE_PS {
                let params = ModelParams::new(p, q)?;
                for r in verify_representation(&g, &params, caps)? {
                    reports.push(CheckReport::new(
                        format!("{} {name} p={p} q={q}", r.check),
                        r.max_violation,
                        r.tolerance,
                    ));
                }
            }
        }
    }
    Ok(reports)
}

/// Operator properties of M, M*, T_e plus the component-counting identity.
pub fn properties_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (name, g) in fixtures() {
        if g.n_vertices() > cfg.max_vertices {
            continue;
        }
        for &q in &cfg.qs {
            for p in FIXTURE_PS {
                let params = ModelParams::new(p, q)?;
                for r in verify_lemma_properties(&g, &params, caps)? {
                    reports.push(CheckReport::new(
                        format!("{} {name} p={p} q={q}", r.check),
                        r.max_violation,
                        r.tolerance,
                    ));
                }
            }
        }
    }
    let triangle = Graph::cycle(3).unwrap();
    for q in cfg.qs.iter().filter(|q| q.fract() == 0.0).map(|&q| q as usize) {
        reports.push(CheckReport::new(
            format!("counting-identity triangle q={q}"),
            counting_identity_violation(&triangle, q),
            1e-12,
        ));
    }
    Ok(reports)
}

/// The joint measure marginalizes to the Potts and RC measures.
pub fn marginals_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (name, g) in [("triangle", Graph::cycle(3).unwrap()), ("path4", Graph::path(4).unwrap())] {
        if g.n_vertices() > cfg.max_vertices {
            continue;
        }
        for &q in &cfg.qs {
            for p in FIXTURE_PS {
                let params = ModelParams::new(p, q)?;
                let joint = fkes_distribution(&g, &params, caps)?;
                let potts = potts_distribution(&g, &params, caps)?;
                let rc = rc_distribution(&g, &params, caps)?;
                let m = g.n_edges();
                let mut worst_potts = 0.0f64;
                for (s, pi_s) in potts.iter().enumerate() {
                    let sum: f64 = (0..1usize << m).map(|a| joint[(s << m) + a]).sum();
                    worst_potts = worst_potts.max((sum - pi_s).abs());
                }
                let mut worst_rc = 0.0f64;
                for (a, mu_a) in rc.iter().enumerate() {
                    let sum: f64 = (0..potts.len()).map(|s| joint[(s << m) + a]).sum();
                    worst_rc = worst_rc.max((sum - mu_a).abs());
                }
                let tag = format!("{name} p={p} q={q}");
                reports.push(CheckReport::new(
                    format!("marginal-potts {tag}"),
                    worst_potts,
                    1e-12,
                ));
                reports.push(CheckReport::new(format!("marginal-rc {tag}"), worst_rc, 1e-12));
            }
        }
    }
    Ok(reports)
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut remaining: Vec<usize> = seq.to_vec();
    for i in 0..seq.len() {
        let leaf = (0..n)
            .find(|&v| degree[v] == 1 && !remaining[i..].contains(&v))
            .expect("valid Prufer sequence");
        edges.push((leaf.min(seq[i]), leaf.max(seq[i])));
        degree[leaf] -= 1;
        degree[seq[i]] -= 1;
        remaining[i] = usize::MAX;
    }
    let last: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((last[0], last[1]));
    edges
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical_edges(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    permutations(n)
        .into_iter()
        .map(|perm| {
            let mut relabeled: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
                .collect();
            relabeled.sort();
            relabeled
        })
        .min()
        .unwrap()
}

/// All trees with up to `max_edges` edges, one per isomorphism class.
pub fn trees_up_to(max_edges: usize) -> Vec<Graph> {
    assert!(max_edges <= 5, "tree enumeration capped at 5 edges");
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for n in 2..=max_edges + 1 {
        let mut push = |edges: Vec<(usize, usize)>| {
            let canon = canonical_edges(n, &edges);
            if seen.insert((n, canon.clone())) {
                out.push(Graph::new(n, canon).unwrap());
            }
        };
        if n == 2 {
            push(vec![(0, 1)]);
            continue;
        }
        let seq_len = n - 2;
        let total = n.pow(seq_len as u32);
        for code in 0..total {
            let mut seq = Vec::with_capacity(seq_len);
            let mut rest = code;
            for _ in 0..seq_len {
                seq.push(rest % n);
                rest /= n;
            }
            push(prufer_decode(&seq, n));
        }
    }
    out
}

/// Tree gap formula versus the eigensolver, and the Swendsen-Wang
/// inverse-gap bound on trees.
pub fn tree_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (ti, g) in trees_up_to(5).into_iter().enumerate() {
        for p in FIXTURE_PS {
            for &q in &cfg.qs {
                let params = ModelParams::new(p, q)?;
                let formula = bounds::tree_gap_exact(&g, &params)?;
                let eig = spectral_gap(&sb_matrix(&g, &params, true, caps)?, caps)?.gap;
                let tag = format!("tree{ti}(m={}) p={p} q={q}", g.n_edges());
                reports.push(CheckReport::new(
                    format!("tree-gap-formula {tag}"),
                    (formula - eig).abs(),
                    1e-10,
                ));
                let gap_sw = spectral_gap(&sw_matrix(&g, &params, caps)?, caps)?.gap;
                let bound = bounds::sw_tree_bound(&g, &params)?;
                reports.push(CheckReport::new(
                    format!("sw-tree-bound {tag}"),
                    (1.0 / gap_sw - bound).max(0.0),
                    1e-9,
                ));
            }
        }
    }
    Ok(reports)
}

fn offdiag_domination(upper: &StochasticMatrix, lower: &StochasticMatrix, factor: f64) -> f64 {
    // max over A != B of lower(A,B) - factor * upper(A,B)
    let n = upper.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                worst = worst.max(lower.get(a, b) - factor * upper.get(a, b));
            }
        }
    }
    worst
}

/// Heat-bath entrywise/gap sandwich and the Metropolis comparison.
pub fn sandwich_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (gi, g, p, q) in grid_points(cfg)? {
        let params = ModelParams::new(p, q)?;
        let sb = sb_matrix(&g, &params, true, caps)?;
        let hb = DynamicsKind::Heatbath.build(&g, &params, caps)?;
        let pm = DynamicsKind::Metropolis.build(&g, &params, caps)?;
        let factor = 1.0 / (1.0 - p * (1.0 - 1.0 / q));
        let tag = point_tag(gi, &g, p, q);

        let lower = offdiag_domination(&hb, &sb, 1.0); // sb <= hb
        let upper = offdiag_domination(&sb, &hb, factor); // hb <= factor*sb
        reports.push(CheckReport::new(
            format!("hb-entrywise {tag}"),
            lower.max(upper),
            1e-12,
        ));

        let gap_sb = spectral_gap(&sb, caps)?.gap;
        let gap_hb = spectral_gap(&hb, caps)?.gap;
        let gap_violation = (gap_sb - gap_hb).max(gap_hb - factor * gap_sb).max(0.0);
        reports.push(CheckReport::new(format!("hb-gap {tag}"), gap_violation, 1e-9));

        reports.push(CheckReport::new(
            format!("metropolis-entrywise {tag}"),
            offdiag_domination(&sb, &pm, 2.0 * q),
            1e-12,
        ));

        let gap_pm = spectral_gap(&pm, caps)?.gap;
        reports.push(CheckReport::new(
            format!("metropolis-gap {tag}"),
            (1.0 / gap_sb - 2.0 * q / gap_pm).max(0.0),
            1e-9,
        ));
    }
    Ok(reports)
}

/// Exact mixing times against the gap sandwich, plus the mixing-time
/// comparison factor between Swendsen-Wang and single-bond.
pub fn mixing_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (gi, g, p, q) in grid_points(cfg)? {
        let params = ModelParams::new(p, q)?;
        let tag = point_tag(gi, &g, p, q);
        let mut tau_of: std::collections::HashMap<&str, f64> = Default::default();
        for kind in DynamicsKind::ALL {
            let mat = kind.build(&g, &params, caps)?;
            let gap = spectral_gap(&mat, caps)?.gap;
            let pi_min = mat.stationary().iter().cloned().fold(f64::INFINITY, f64::min);
            let (lo, hi) = sandwich_bounds_from(gap, pi_min);
            let tau = exact_mixing_time(&mat, 1_000_000, caps)?
                .mixing_time
                .ok_or_else(|| Error::parameter("mixing time cap exceeded"))? as f64;
            tau_of.insert(kind.name(), tau);
            let violation = (lo - tau).max(tau - hi).max(0.0);
            reports.push(CheckReport::new(
                format!("mixing-sandwich {} {tag}", kind.name()),
                violation,
                1e-9,
            ));
        }
        let factor = bounds::mixing_comparison_factor(&g, &params);
        reports.push(CheckReport::new(
            format!("mixing-comparison {tag}"),
            (tau_of["sw"] - factor * tau_of["sb"]).max(0.0),
            1e-9,
        ));
    }
    Ok(reports)
}

/// Chi-square census of the one-step samplers against the exact rows.
pub fn sampler_suite(caps: &Caps) -> Result<Vec<CheckReport>> {
    const N_SAMPLES: usize = 100_000;
    const P_THRESHOLD: f64 = 0.001;
    let params = ModelParams::new(0.5, 2.0)?;
    let mut reports = Vec::new();
    for (name, g) in [("K2", Graph::path(2).unwrap()), ("triangle", Graph::cycle(3).unwrap())] {
        let m = g.n_edges();
        let n_states = 1usize << m;
        for kind in [DynamicsKind::Sw, DynamicsKind::Sb] {
            let mat = kind.build(&g, &params, caps)?;
            for start_bits in 0..n_states {
                let start = EdgeSubset::from_bits(start_bits as u32, m);
                let mut rng = RngState::new(0);
                let mut hits = vec![0usize; n_states];
                for _ in 0..N_SAMPLES {
                    let next = match kind {
                        DynamicsKind::Sw => sw_step(&g, &params, &start, &mut rng)?,
                        _ => sb_step(&g, &params, &start, &mut rng),
                    };
                    hits[next.index()] += 1;
                }
                let row = mat.row(start_bits);
                let mut chi2 = 0.0f64;
                let mut dof = 0usize;
                let mut impossible_hits = 0usize;
                for b in 0..n_states {
                    if row[b] > 0.0 {
                        let expected = row[b] * N_SAMPLES as f64;
                        let diff = hits[b] as f64 - expected;
                        chi2 += diff * diff / expected;
                        dof += 1;
                    } else {
                        impossible_hits += hits[b];
                    }
                }
                let p_value = if dof <= 1 {
                    1.0
                } else {
                    1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(chi2)
                };
                let violation = if impossible_hits > 0 {
                    impossible_hits as f64
                } else {
                    (P_THRESHOLD - p_value).max(0.0)
                };
                reports.push(CheckReport::new(
                    format!(
                        "sampler {} {name} start={start_bits} p-value={p_value:.5}",
                        kind.name()
                    ),
                    violation,
                    0.0,
                ));
            }
        }
    }
    Ok(reports)
}

fn width_graph_family(cfg: &SuiteConfig) -> Result<Vec<(String, Graph)>> {
    let mut graphs: Vec<(String, Graph)> = enumerate_connected_graphs(cfg.max_vertices)?
        .into_iter()
        .enumerate()
        .map(|(i, g)| (format!("g{i}"), g))
        .collect();
    for l in 4..=8 {
        graphs.push((format!("C{l}"), Graph::cycle(l)?));
    }
    for n in [5, 6, 8] {
        graphs.push((format!("P{n}"), Graph::path(n)?));
    }
    graphs.push(("star5".into(), Graph::star(5)?));
    graphs.push(("torus22".into(), Graph::torus(2, 2)?));
    Ok(graphs)
}

/// Width facts: cycle bandwidth, the linear-width/bandwidth chain, the
/// torus width bound, and witness re-evaluation.
pub fn width_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let _ = caps;
    let mut reports = Vec::new();
    for l in 4..=8usize {
        let g = Graph::cycle(l)?;
        let bw = bounds::bandwidth_exact(&g)?;
        reports.push(CheckReport::new(
            format!("cycle-bandwidth C{l}"),
            (bw.width as f64 - 2.0).abs(),
            0.0,
        ));
    }
    for (name, g) in width_graph_family(cfg)? {
        if g.n_edges() > 8 || g.n_vertices() > 10 {
            continue;
        }
        let bw = bounds::bandwidth_exact(&g)?;
        let lw = bounds::linear_width_exact(&g)?;
        let witness_err = (bounds::bandwidth_of_ordering(&g, &bw.witness) != bw.width) as usize
            + (bounds::linear_width_of_ordering(&g, &lw.witness) != lw.width) as usize;
        reports.push(CheckReport::new(
            format!("width-witness {name}"),
            witness_err as f64,
            0.0,
        ));
        reports.push(CheckReport::new(
            format!("width-chain {name} lw={} bw={}", lw.width, bw.width),
            (lw.width as f64 - bw.width as f64 - 1.0).max(0.0),
            0.0,
        ));
    }
    reports.push(CheckReport::new(
        "torus-width-bound L=3 d=2",
        (bounds::torus_linear_width_bound(3, 2)? as f64 - 7.0).abs(),
        0.0,
    ));
    Ok(reports)
}

/// Bound calculators: the torus constants, domination of the exact
/// inverse gap by the linear-width bound, and the mu_min lower bound.
pub fn bounds_suite(cfg: &SuiteConfig, caps: &Caps) -> Result<Vec<CheckReport>> {
    let mut reports = vec![
        CheckReport::new("k1(0.5)", (bounds::k1(0.5) - 0.8697417).abs(), 1e-6),
        CheckReport::new("k2(2)", (bounds::k2(2.0) - 6.6060306).abs(), 1e-6),
    ];
    for (gi, g, p, q) in grid_points(cfg)? {
        let params = ModelParams::new(p, q)?;
        let tag = point_tag(gi, &g, p, q);
        let lw = bounds::linear_width_exact(&g)?.width;
        let log_bound = bounds::width_gap_bound(g.n_edges(), q, lw);
        let gap_sb = spectral_gap(&sb_matrix(&g, &params, true, caps)?, caps)?.gap;
        reports.push(CheckReport::new(
            format!("width-gap-bound {tag} lw={lw}"),
            ((1.0 / gap_sb).ln() - log_bound).max(0.0),
            1e-9,
        ));
        let mu = rc_distribution(&g, &params, caps)?;
        let mu_min = mu.iter().cloned().fold(f64::INFINITY, f64::min);
        reports.push(CheckReport::new(
            format!("mu-min-bound {tag}"),
            (mu_min_lower_bound(&g, &params) - mu_min).max(0.0),
            1e-12,
        ));
    }
    // torus(2,2) smoke test against the Theorem 7.1 calculator
    {
        let g = Graph::torus(2, 2)?;
        let params = ModelParams::new(0.5, 2.0)?;
        let sb = sb_matrix(&g, &params, true, caps)?;
        let tau = exact_mixing_time(&sb, 1_000_000, caps)?
            .mixing_time
            .ok_or_else(|| Error::parameter("mixing time cap exceeded"))?;
        let bound = bounds::torus_upper_bound(&params, 2, 2)?;
        reports.push(CheckReport::new(
            format!("torus22-smoke tau={tau}"),
            ((tau as f64).ln() - bound.log_bound).max(0.0),
            1e-9,
        ));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_enumeration_counts() {
        // unlabeled trees on 2..=6 vertices: 1, 1, 2, 3, 6
        let trees = trees_up_to(5);
        assert_eq!(trees.len(), 13);
        for t in &trees {
            assert!(t.is_tree());
            assert!(t.n_edges() <= 5);
        }
    }

    #[test]
    fn suite_names_all_dispatch() {
        // cheap suites run end to end on a reduced grid
        let cfg = SuiteConfig { ps: vec![0.5], qs: vec![2.0], max_vertices: 3 };
        let caps = Caps::default();
        for name in ["theorem", "marginals", "width", "bounds"] {
            let reports = run_suite(name, &cfg, &caps).unwrap();
            assert!(!reports.is_empty());
            for r in &reports {
                assert!(r.pass, "{}: {} > {}", r.check, r.max_violation, r.tolerance);
            }
        }
        assert!(run_suite("nope", &cfg, &caps).is_err());
    }
}
