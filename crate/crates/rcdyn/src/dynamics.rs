//! Exact transition matrices and seeded single-step samplers for the
//! four random-cluster dynamics: Swendsen-Wang, (lazy or non-lazy)
//! single-bond, heat-bath and Metropolis.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{components, connected_in, EdgeSubset, Graph};
use crate::models::{n_spin_configs, rc_distribution, ModelParams, SpinConfig};
use crate::models::monochromatic_edges;
use crate::Caps;

/// Dense row-stochastic matrix over an indexed state space together
/// with its stationary measure.
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    dim: usize,
    data: Vec<f64>,
    stationary: Vec<f64>,
    lazy: bool,
}

impl StochasticMatrix {
    pub fn new_zero(dim: usize, stationary: Vec<f64>, lazy: bool) -> Self {
        assert_eq!(stationary.len(), dim);
        StochasticMatrix { dim, data: vec![0.0; dim * dim], stationary, lazy }
    }

    pub fn identity(stationary: Vec<f64>) -> Self {
        let dim = stationary.len();
        let mut m = StochasticMatrix::new_zero(dim, stationary, true);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Rank-one projector onto the stationary measure: P(x,y) = pi(y).
    pub fn stationary_projector(stationary: Vec<f64>) -> Self {
        let dim = stationary.len();
        let mut m = StochasticMatrix::new_zero(dim, stationary.clone(), false);
        for i in 0..dim {
            m.data[i * dim..(i + 1) * dim].copy_from_slice(&stationary);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Clamps tiny negative round-off entries to zero.
    fn clamp_small_negatives(&mut self) {
        for v in &mut self.data {
            if *v < 0.0 {
                assert!(*v > -1e-15, "negative entry {v} beyond round-off");
                *v = 0.0;
            }
        }
    }

    pub fn row_sum_max_err(&self) -> f64 {
        (0..self.dim)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Max over (x,y) of |pi(x)P(x,y) - pi(y)P(y,x)|.
    pub fn detailed_balance_max_err(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.dim {
            for y in x + 1..self.dim {
                let v = (self.stationary[x] * self.get(x, y)
                    - self.stationary[y] * self.get(y, x))
                .abs();
                worst = worst.max(v);
            }
        }
        worst
    }

    /// Max entry of |pi P - pi|.
    pub fn stationary_residual(&self) -> f64 {
        (0..self.dim)
            .map(|y| {
                let v: f64 = (0..self.dim)
                    .map(|x| self.stationary[x] * self.get(x, y))
                    .sum();
                (v - self.stationary[y]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).fold(f64::INFINITY, f64::min)
    }

    /// Dense product self * other (shared stationary measure).
    pub fn matmul(&self, other: &StochasticMatrix) -> StochasticMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = StochasticMatrix::new_zero(n, self.stationary.clone(), false);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += a * row[j];
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_rc_caps(g: &Graph, caps: &Caps) -> Result<usize> {
    let m = g.n_edges();
    if m == 0 {
        return Err(Error::parameter("graph has no edges"));
    }
    if m >= crate::graph::MAX_EDGES {
        return Err(Error::SizeLimit {
            what: "RC state space".into(),
            requested: m,
            cap: crate::graph::MAX_EDGES,
        });
    }
    let n_states = 1usize << m;
    caps.check_rc(n_states)?;
    Ok(n_states)
}

/// Swendsen-Wang transition matrix on edge subsets:
/// P(A,B) = q^{-c(A)} (p/(1-p))^{|B|} sum_sigma (1-p)^{|E(sigma)|} 1(sigma in Omega(A u B)).
///
/// The sigma sum is taken over all colorings via a superset-sum
/// transform of the monochromatic-edge-set census, and each entry is
/// exponentiated once from log scale.
pub fn sw_matrix(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<StochasticMatrix> {
    let q = params.q_int()?;
    let n_states = check_rc_caps(g, caps)?;
    let m = g.n_edges();
    let n_spins = n_spin_configs(g, q, caps)?;
    let p = params.p();

    // h[U] = sum over sigma with E(sigma) superset of U of (1-p)^{|E(sigma)|}
    let mut h = vec![0.0f64; n_states];
    for s in 0..n_spins {
        let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
        let mask = monochromatic_edges(g, &sigma);
        h[mask.index()] += (1.0 - p).powi(mask.size() as i32);
    }
    for bit in 0..m {
        for u in 0..n_states {
            if u >> bit & 1 == 0 {
                h[u] += h[u | 1 << bit];
            }
        }
    }

    let log_odds = params.log_odds();
    let log_q = params.q().ln();
    let mu = rc_distribution(g, params, caps)?;
    let mut mat = StochasticMatrix::new_zero(n_states, mu, false);
    for a in 0..n_states {
        let sub_a = EdgeSubset::from_bits(a as u32, m);
        let (c, _) = components(g, &sub_a);
        for b in 0..n_states {
            let union = a | b;
            if h[union] == 0.0 {
                continue;
            }
            let size_b = (b as u32).count_ones() as f64;
            let lw = -(c as f64) * log_q + size_b * log_odds + h[union].ln();
            mat.set(a, b, lw.exp());
        }
    }
    mat.clamp_small_negatives();
    Ok(mat)
}

/// Independent route to the Swendsen-Wang matrix: compose the
/// component-coloring kernel with the edge-retention kernel, following
/// the two-step procedural description rather than the closed formula.
pub fn sw_matrix_two_step(
    g: &Graph,
    params: &ModelParams,
    caps: &Caps,
) -> Result<StochasticMatrix> {
    let q = params.q_int()?;
    let n_states = check_rc_caps(g, caps)?;
    n_spin_configs(g, q, caps)?;
    let m = g.n_edges();
    let p = params.p();
    let mu = rc_distribution(g, params, caps)?;
    let mut mat = StochasticMatrix::new_zero(n_states, mu, false);

    for a in 0..n_states {
        let sub_a = EdgeSubset::from_bits(a as u32, m);
        let (c, labels) = components(g, &sub_a);
        let mut roots: Vec<usize> = Vec::new();
        for v in 0..g.n_vertices() {
            if labels[v] == v {
                roots.push(v);
            }
        }
        debug_assert_eq!(roots.len(), c);
        let weight = (q as f64).powi(-(c as i32));
        // every assignment of colors to components
        let n_colorings = q.pow(c as u32);
        for code in 0..n_colorings {
            let mut color_of_root = std::collections::HashMap::new();
            let mut rest = code;
            for &r in &roots {
                color_of_root.insert(r, rest % q + 1);
                rest /= q;
            }
            let colors: Vec<usize> =
                (0..g.n_vertices()).map(|v| color_of_root[&labels[v]]).collect();
            let sigma = SpinConfig::new(colors, q)?;
            let mono = monochromatic_edges(g, &sigma);
            let mono_bits = mono.bits() as usize;
            let k = mono.size();
            // retention kernel: B subset of E(sigma), each kept w.p. p
            let mut sub = mono_bits;
            loop {
                let size_b = (sub as u32).count_ones() as usize;
                let prob = p.powi(size_b as i32) * (1.0 - p).powi((k - size_b) as i32);
                mat.add(a, sub, weight * prob);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mono_bits;
            }
        }
    }
    Ok(mat)
}

/// The single-edge kernel P_e: the case split tests connectivity of the
/// endpoints of e in (V, A) itself, so endpoints of a present edge are
/// always connected through it.
pub fn single_edge_matrix(
    g: &Graph,
    params: &ModelParams,
    e: usize,
    caps: &Caps,
) -> Result<StochasticMatrix> {
    let n_states = check_rc_caps(g, caps)?;
    let m = g.n_edges();
    if e >= m {
        return Err(Error::parameter(format!("edge index {e} out of range")));
    }
    let (e1, e2) = g.edge(e);
    let p = params.p();
    let q = params.q();
    let mu = rc_distribution(g, params, caps)?;
    let mut mat = StochasticMatrix::new_zero(n_states, mu, false);
    for a in 0..n_states {
        let sub_a = EdgeSubset::from_bits(a as u32, m);
        let keep = if connected_in(g, &sub_a, e1, e2) { p } else { p / q };
        let up = sub_a.with_edge(e).index();
        let down = sub_a.without_edge(e).index();
        mat.add(a, up, keep);
        mat.add(a, down, 1.0 - keep);
    }
    Ok(mat)
}

/// Single-bond dynamics: lazy form I/2 + (1/(2|E|)) sum_e P_e, or the
/// non-lazy average of the P_e.
pub fn sb_matrix(
    g: &Graph,
    params: &ModelParams,
    lazy: bool,
    caps: &Caps,
) -> Result<StochasticMatrix> {
    let n_states = check_rc_caps(g, caps)?;
    let m = g.n_edges();
    let mu = rc_distribution(g, params, caps)?;
    let mut mat = StochasticMatrix::new_zero(n_states, mu, lazy);
    let edge_weight = if lazy { 0.5 / m as f64 } else { 1.0 / m as f64 };
    for e in 0..m {
        let pe = single_edge_matrix(g, params, e, caps)?;
        for a in 0..n_states {
            for b in 0..n_states {
                let v = pe.get(a, b);
                if v != 0.0 {
                    mat.add(a, b, edge_weight * v);
                }
            }
        }
    }
    if lazy {
        for a in 0..n_states {
            mat.add(a, a, 0.5);
        }
    }
    Ok(mat)
}

/// Heat-bath dynamics on edge subsets (eq. P-HB form): off-diagonal
/// mass (1/(2|E|)) mu(B) / (mu(A u e) + mu(A \ e)), diagonal completing
/// the rows.
pub fn heatbath_matrix(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<StochasticMatrix> {
    let n_states = check_rc_caps(g, caps)?;
    let m = g.n_edges();
    let mu = rc_distribution(g, params, caps)?;
    let mut mat = StochasticMatrix::new_zero(n_states, mu.clone(), true);
    for a in 0..n_states {
        let sub_a = EdgeSubset::from_bits(a as u32, m);
        let mut off_diag = 0.0;
        for e in 0..m {
            let up = sub_a.with_edge(e).index();
            let down = sub_a.without_edge(e).index();
            let denom = mu[up] + mu[down];
            let b = sub_a.toggled(e).index();
            let v = mu[b] / denom / (2.0 * m as f64);
            mat.add(a, b, v);
            off_diag += v;
        }
        mat.add(a, a, 1.0 - off_diag);
    }
    mat.clamp_small_negatives();
    Ok(mat)
}

/// Metropolis version of the single-bond dynamics:
/// P(A, A xor e) = (1/(2|E|)) min{1, q^{dc} (p/(1-p))^{dsize}}.
pub fn metropolis_matrix(
    g: &Graph,
    params: &ModelParams,
    caps: &Caps,
) -> Result<StochasticMatrix> {
    let n_states = check_rc_caps(g, caps)?;
    let m = g.n_edges();
    let mu = rc_distribution(g, params, caps)?;
    let log_odds = params.log_odds();
    let log_q = params.q().ln();
    let mut mat = StochasticMatrix::new_zero(n_states, mu, true);
    for a in 0..n_states {
        let sub_a = EdgeSubset::from_bits(a as u32, m);
        let (c_a, _) = components(g, &sub_a);
        let mut off_diag = 0.0;
        for e in 0..m {
            let flipped = sub_a.toggled(e);
            let (c_b, _) = components(g, &flipped);
            let dc = c_b as f64 - c_a as f64;
            let dsize = flipped.size() as f64 - sub_a.size() as f64;
            let ratio = (dc * log_q + dsize * log_odds).exp();
            let v = ratio.min(1.0) / (2.0 * m as f64);
            mat.add(a, flipped.index(), v);
            off_diag += v;
        }
        mat.add(a, a, 1.0 - off_diag);
    }
    mat.clamp_small_negatives();
    Ok(mat)
}

/// The dynamics selectable from the CLI and verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    Sw,
    Sb,
    SbNonLazy,
    Heatbath,
    Metropolis,
}

impl DynamicsKind {
    pub const ALL: [DynamicsKind; 5] = [
        DynamicsKind::Sw,
        DynamicsKind::Sb,
        DynamicsKind::SbNonLazy,
        DynamicsKind::Heatbath,
        DynamicsKind::Metropolis,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DynamicsKind::Sw => "sw",
            DynamicsKind::Sb => "sb",
            DynamicsKind::SbNonLazy => "sb-nonlazy",
            DynamicsKind::Heatbath => "heatbath",
            DynamicsKind::Metropolis => "metropolis",
        }
    }

    pub fn build(
        &self,
        g: &Graph,
        params: &ModelParams,
        caps: &Caps,
    ) -> Result<StochasticMatrix> {
        match self {
            DynamicsKind::Sw => sw_matrix(g, params, caps),
            DynamicsKind::Sb => sb_matrix(g, params, true, caps),
            DynamicsKind::SbNonLazy => sb_matrix(g, params, false, caps),
            DynamicsKind::Heatbath => heatbath_matrix(g, params, caps),
            DynamicsKind::Metropolis => metropolis_matrix(g, params, caps),
        }
    }
}

impl std::str::FromStr for DynamicsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DynamicsKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::parameter(format!("unknown dynamics '{s}'")))
    }
}

/// Deterministic, seeded generator driving the samplers. The same seed
/// produces the same trajectory on every platform.
pub struct RngState {
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn coin(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn pick(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// One Swendsen-Wang step. Randomness consumption order: one color per
/// component in ascending canonical-label order, then one retention
/// coin per monochromatic edge in ascending edge-index order.
pub fn sw_step(
    g: &Graph,
    params: &ModelParams,
    a: &EdgeSubset,
    rng: &mut RngState,
) -> Result<EdgeSubset> {
    let q = params.q_int()?;
    let (_, labels) = components(g, a);
    let mut colors = vec![0usize; g.n_vertices()];
    for v in 0..g.n_vertices() {
        if labels[v] == v {
            colors[v] = rng.pick(q) + 1;
        }
    }
    for v in 0..g.n_vertices() {
        colors[v] = colors[labels[v]];
    }
    let mut next = EdgeSubset::empty(g.n_edges());
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        if colors[u] == colors[v] && rng.coin() < params.p() {
            next = next.with_edge(i);
        }
    }
    Ok(next)
}

/// One lazy single-bond step. Randomness consumption order: laziness
/// coin (hold if < 1/2), edge choice, retention coin; the last two are
/// only consumed when the chain moves.
pub fn sb_step(
    g: &Graph,
    params: &ModelParams,
    a: &EdgeSubset,
    rng: &mut RngState,
) -> EdgeSubset {
    if rng.coin() < 0.5 {
        return *a;
    }
    let e = rng.pick(g.n_edges());
    let (e1, e2) = g.edge(e);
    let keep = if connected_in(g, a, e1, e2) {
        params.p()
    } else {
        params.p() / params.q()
    };
    if rng.coin() < keep {
        a.with_edge(e)
    } else {
        a.without_edge(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::default()
    }

    fn k2() -> Graph {
        Graph::path(2).unwrap()
    }

    fn triangle() -> Graph {
        Graph::cycle(3).unwrap()
    }

    #[test]
    fn sw_k2_entries() {
        for (p, q) in [(0.5, 2.0), (0.3, 3.0), (0.8, 2.0)] {
            let params = ModelParams::new(p, q).unwrap();
            let sw = sw_matrix(&k2(), &params, &caps()).unwrap();
            assert!((sw.get(0, 1) - p / q).abs() < 1e-13, "P(empty,e) = p/q");
            assert!((sw.get(1, 1) - p).abs() < 1e-13, "P(e,e) = p");
            assert!(sw.row_sum_max_err() < 1e-12);
        }
    }

    #[test]
    fn sw_q1_rows_identical() {
        let params = ModelParams::new(0.4, 1.0).unwrap();
        let g = triangle();
        let sw = sw_matrix(&g, &params, &caps()).unwrap();
        for b in 0..8 {
            let expect = 0.4f64.powi((b as u32).count_ones() as i32)
                * 0.6f64.powi(3 - (b as u32).count_ones() as i32);
            for a in 0..8 {
                assert!((sw.get(a, b) - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sw_stationarity_and_balance() {
        let params = ModelParams::new(0.37, 2.0).unwrap();
        let sw = sw_matrix(&triangle(), &params, &caps()).unwrap();
        assert!(sw.stationary_residual() < 1e-12);
        assert!(sw.detailed_balance_max_err() < 1e-12);
    }

    #[test]
    fn sw_two_routes_agree() {
        for g in [k2(), triangle(), Graph::path(4).unwrap(), Graph::complete(4).unwrap()] {
            for (p, q) in [(0.2, 2.0), (0.5, 3.0), (0.8, 2.0)] {
                let params = ModelParams::new(p, q).unwrap();
                let a = sw_matrix(&g, &params, &caps()).unwrap();
                let b = sw_matrix_two_step(&g, &params, &caps()).unwrap();
                assert!(
                    a.max_abs_diff(&b) < 1e-12,
                    "SW formula vs two-step on |V|={} p={p} q={q}",
                    g.n_vertices()
                );
            }
        }
    }

    #[test]
    fn single_edge_k2() {
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let pe = single_edge_matrix(&k2(), &params, 0, &caps()).unwrap();
        // rows indexed (empty, {e}); endpoints of a present edge are
        // connected via the edge itself
        assert!((pe.get(0, 0) - 0.75).abs() < 1e-15);
        assert!((pe.get(0, 1) - 0.25).abs() < 1e-15);
        assert!((pe.get(1, 0) - 0.5).abs() < 1e-15);
        assert!((pe.get(1, 1) - 0.5).abs() < 1e-15);
        assert!(pe.row_sum_max_err() == 0.0);
    }

    #[test]
    fn single_edge_connected_through_rest() {
        let g = triangle();
        let params = ModelParams::new(0.3, 2.0).unwrap();
        let pe = single_edge_matrix(&g, &params, 2, &caps()).unwrap();
        // A = {edge0, edge1} connects the endpoints of edge2
        let a = EdgeSubset::from_edges(&[0, 1], 3);
        assert!((pe.get(a.index(), a.with_edge(2).index()) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sb_structure() {
        let params = ModelParams::new(0.37, 3.0).unwrap();
        let g = triangle();
        let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        assert!(sb.min_diagonal() >= 0.5);
        assert!(sb.row_sum_max_err() < 1e-12);
        assert!(sb.stationary_residual() < 1e-12);
        assert!(sb.detailed_balance_max_err() < 1e-12);
        // exact decomposition I/2 + (1/(2m)) sum P_e
        let mut expect = StochasticMatrix::new_zero(8, sb.stationary().to_vec(), true);
        for e in 0..3 {
            let pe = single_edge_matrix(&g, &params, e, &caps()).unwrap();
            for a in 0..8 {
                for b in 0..8 {
                    expect.add(a, b, pe.get(a, b) / 6.0);
                }
            }
        }
        for a in 0..8 {
            expect.add(a, a, 0.5);
        }
        assert!(sb.max_abs_diff(&expect) < 1e-15);
        let nonlazy = sb_matrix(&g, &params, false, &caps()).unwrap();
        assert!(nonlazy.detailed_balance_max_err() < 1e-12);
    }

    #[test]
    fn heatbath_k2_and_sandwich() {
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let hb = heatbath_matrix(&k2(), &params, &caps()).unwrap();
        // mu = (2/3, 1/3): P(empty, e) = (1/2) * (1/3)
        assert!((hb.get(0, 1) - 1.0 / 6.0).abs() < 1e-14);
        assert!(hb.row_sum_max_err() < 1e-12);

        let g = triangle();
        let hb = heatbath_matrix(&g, &params, &caps()).unwrap();
        let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        assert!(hb.detailed_balance_max_err() < 1e-12);
        let factor = 1.0 / (1.0 - 0.5 * (1.0 - 0.5));
        for a in 0..8 {
            for b in 0..8 {
                if a == b {
                    continue;
                }
                assert!(sb.get(a, b) <= hb.get(a, b) + 1e-12);
                assert!(hb.get(a, b) <= factor * sb.get(a, b) + 1e-12);
            }
        }
    }

    #[test]
    fn metropolis_k2_and_comparison() {
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let pm = metropolis_matrix(&k2(), &params, &caps()).unwrap();
        // min{1, q^{1-2} * 1} / 2 = 1/4
        assert!((pm.get(0, 1) - 0.25).abs() < 1e-14);
        assert!(pm.min_diagonal() >= 0.5);
        assert!(pm.detailed_balance_max_err() < 1e-12);

        let params = ModelParams::new(0.3, 2.0).unwrap();
        let g = triangle();
        let pm = metropolis_matrix(&g, &params, &caps()).unwrap();
        let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                if a != b {
                    assert!(pm.get(a, b) <= 2.0 * params.q() * sb.get(a, b) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn samplers_deterministic() {
        let g = triangle();
        let params = ModelParams::new(0.6, 2.0).unwrap();
        let start = EdgeSubset::from_edges(&[0], 3);
        let run = |seed| {
            let mut rng = RngState::new(seed);
            let mut state = start;
            let mut trace = Vec::new();
            for _ in 0..50 {
                state = sw_step(&g, &params, &state, &mut rng).unwrap();
                state = sb_step(&g, &params, &state, &mut rng);
                trace.push(state.bits());
            }
            trace
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn sw_census_matches_matrix_row() {
        let g = k2();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let sw = sw_matrix(&g, &params, &caps()).unwrap();
        let mut rng = RngState::new(0);
        let start = EdgeSubset::empty(1);
        let n = 100_000;
        let mut hits = [0usize; 2];
        for _ in 0..n {
            hits[sw_step(&g, &params, &start, &mut rng).unwrap().index()] += 1;
        }
        for b in 0..2 {
            let p_hat = hits[b] as f64 / n as f64;
            let p_true = sw.get(0, b);
            let se = (p_true * (1.0 - p_true) / n as f64).sqrt();
            assert!(
                (p_hat - p_true).abs() < 3.0 * se + 1e-9,
                "state {b}: {p_hat} vs {p_true}"
            );
        }
    }

    #[test]
    fn sb_census_matches_matrix_row() {
        let g = triangle();
        let params = ModelParams::new(0.4, 3.0).unwrap();
        let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        let start = EdgeSubset::from_edges(&[0, 1], 3);
        let mut rng = RngState::new(1);
        let n = 100_000;
        let mut hits = [0usize; 8];
        for _ in 0..n {
            hits[sb_step(&g, &params, &start, &mut rng).index()] += 1;
        }
        for b in 0..8 {
            let p_true = sb.get(start.index(), b);
            let p_hat = hits[b] as f64 / n as f64;
            let se = (p_true * (1.0 - p_true) / n as f64).sqrt();
            assert!((p_hat - p_true).abs() < 3.0 * se + 1e-9);
        }
    }
}
