//! The random-cluster, Potts and joint (FKES) measures, evaluated
//! exactly in log space by full enumeration.
//!
//! State indexing used throughout the crate:
//! - an edge subset A has index `A.bits()` in `[0, 2^|E|)`,
//! - a coloring sigma has index `sum_v (sigma(v)-1) * q^v` (vertex 0
//!   least significant), colors in `{1..q}`,
//! - a joint state (sigma, A) has index `spin_index * 2^|E| + subset_index`.

use crate::error::{Error, Result};
use crate::graph::{components, EdgeSubset, Graph};
use crate::Caps;

/// Model parameters (p, q) with the derived inverse temperature
/// beta = -log(1-p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::parameter(format!("p must lie in (0,1), got {p}")));
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::parameter(format!("q must be >= 1, got {q}")));
        }
        Ok(ModelParams { p, q, beta: -(1.0 - p).ln() })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// q as an integer; Potts, joint and Swendsen-Wang objects require this.
    pub fn q_int(&self) -> Result<usize> {
        if self.q.fract() == 0.0 && self.q <= u32::MAX as f64 {
            Ok(self.q as usize)
        } else {
            Err(Error::parameter(format!(
                "q must be a positive integer for Potts/joint/SW objects, got {}",
                self.q
            )))
        }
    }

    /// log(p/(1-p)), finite for p in (0,1).
    pub fn log_odds(&self) -> f64 {
        (self.p / (1.0 - self.p)).ln()
    }
}

/// A natural-log-scale weight.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// A Potts coloring, one color in {1..q} per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    colors: Vec<usize>,
    q: usize,
}

impl SpinConfig {
    pub fn new(colors: Vec<usize>, q: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::parameter("q must be >= 1"));
        }
        if colors.iter().any(|&c| c < 1 || c > q) {
            return Err(Error::parameter("spin color out of range"));
        }
        Ok(SpinConfig { colors, q })
    }

    /// Decode a spin index, vertex 0 least significant.
    pub fn from_index(index: usize, n_vertices: usize, q: usize) -> Self {
        let mut colors = Vec::with_capacity(n_vertices);
        let mut rest = index;
        for _ in 0..n_vertices {
            colors.push(rest % q + 1);
            rest /= q;
        }
        SpinConfig { colors, q }
    }

    pub fn to_index(&self) -> usize {
        let mut idx = 0usize;
        for &c in self.colors.iter().rev() {
            idx = idx * self.q + (c - 1);
        }
        idx
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

/// Number of spin configurations q^|V|, checked against the cap.
pub fn n_spin_configs(g: &Graph, q: usize, caps: &Caps) -> Result<usize> {
    let mut n = 1usize;
    for _ in 0..g.n_vertices() {
        n = n
            .checked_mul(q)
            .ok_or_else(|| Error::SizeLimit {
                what: "Potts state space".into(),
                requested: usize::MAX,
                cap: caps.max_joint_states,
            })?;
    }
    caps.check_joint(n)?;
    Ok(n)
}

pub fn joint_index(spin_index: usize, subset: &EdgeSubset) -> usize {
    (spin_index << subset.n_edges()) + subset.index()
}

pub fn split_joint_index(joint: usize, n_edges: usize) -> (usize, u32) {
    (joint >> n_edges, (joint & ((1 << n_edges) - 1)) as u32)
}

/// Numerically stable log of a sum of exponentials.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Unnormalized RC log weight: |A| log(p/(1-p)) + c(A) log q.
pub fn rc_log_weight(g: &Graph, params: &ModelParams, a: &EdgeSubset) -> LogWeight {
    let (c, _) = components(g, a);
    LogWeight(a.size() as f64 * params.log_odds() + (c as f64) * params.q().ln())
}

/// log Z(G, p, q), by max-shifted summation over all 2^|E| subsets.
pub fn rc_log_partition(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<LogWeight> {
    caps.check_rc(1usize << g.n_edges())?;
    let weights: Vec<f64> = EdgeSubset::all(g.n_edges())
        .map(|a| rc_log_weight(g, params, &a).0)
        .collect();
    Ok(LogWeight(log_sum_exp(&weights)))
}

/// mu(A).
pub fn rc_prob(g: &Graph, params: &ModelParams, a: &EdgeSubset, caps: &Caps) -> Result<f64> {
    let log_z = rc_log_partition(g, params, caps)?;
    Ok((rc_log_weight(g, params, a).0 - log_z.0).exp())
}

/// The full RC distribution over all 2^|E| subsets, indexed by subset bits.
pub fn rc_distribution(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<Vec<f64>> {
    caps.check_rc(1usize << g.n_edges())?;
    let weights: Vec<f64> = EdgeSubset::all(g.n_edges())
        .map(|a| rc_log_weight(g, params, &a).0)
        .collect();
    let log_z = log_sum_exp(&weights);
    Ok(weights.iter().map(|w| (w - log_z).exp()).collect())
}

/// E(sigma): the set of monochromatic edges.
pub fn monochromatic_edges(g: &Graph, sigma: &SpinConfig) -> EdgeSubset {
    let mut s = EdgeSubset::empty(g.n_edges());
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        if sigma.color(u) == sigma.color(v) {
            s = s.with_edge(i);
        }
    }
    s
}

/// sigma in Omega(A), i.e. every edge of A is monochromatic under sigma.
pub fn in_omega(g: &Graph, sigma: &SpinConfig, a: &EdgeSubset) -> bool {
    a.is_subset_of(&monochromatic_edges(g, sigma))
}

/// Unnormalized Potts log weight: beta * |E(sigma)|.
pub fn potts_log_weight(g: &Graph, params: &ModelParams, sigma: &SpinConfig) -> LogWeight {
    LogWeight(params.beta() * monochromatic_edges(g, sigma).size() as f64)
}

/// log pi(sigma), normalized by the shared partition function
/// Z(G, 1-e^(-beta), q).
pub fn potts_log_prob(
    g: &Graph,
    params: &ModelParams,
    sigma: &SpinConfig,
    caps: &Caps,
) -> Result<LogWeight> {
    params.q_int()?;
    let log_z = rc_log_partition(g, params, caps)?;
    Ok(LogWeight(potts_log_weight(g, params, sigma).0 - log_z.0))
}

/// Full Potts distribution over all q^|V| colorings, indexed by spin index.
pub fn potts_distribution(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<Vec<f64>> {
    let q = params.q_int()?;
    let n_spins = n_spin_configs(g, q, caps)?;
    let log_z = rc_log_partition(g, params, caps)?;
    Ok((0..n_spins)
        .map(|s| {
            let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
            (potts_log_weight(g, params, &sigma).0 - log_z.0).exp()
        })
        .collect())
}

/// Potts distribution at an arbitrary beta >= 0 (beta = 0 gives the
/// uniform distribution), normalized by direct summation. Test entry
/// point for the zero-temperature-parameter edge case that
/// `ModelParams` excludes.
pub fn potts_distribution_at_beta(
    g: &Graph,
    q: usize,
    beta: f64,
    caps: &Caps,
) -> Result<Vec<f64>> {
    if q < 1 || beta < 0.0 {
        return Err(Error::parameter("need q >= 1 and beta >= 0"));
    }
    let n_spins = n_spin_configs(g, q, caps)?;
    let weights: Vec<f64> = (0..n_spins)
        .map(|s| {
            let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
            beta * monochromatic_edges(g, &sigma).size() as f64
        })
        .collect();
    let log_z = log_sum_exp(&weights);
    Ok(weights.iter().map(|w| (w - log_z).exp()).collect())
}

/// log mu_bar(sigma, A); negative infinity when A is not contained in
/// E(sigma).
pub fn fkes_log_prob(
    g: &Graph,
    params: &ModelParams,
    sigma: &SpinConfig,
    a: &EdgeSubset,
    caps: &Caps,
) -> Result<LogWeight> {
    params.q_int()?;
    if !in_omega(g, sigma, a) {
        return Ok(LogWeight(f64::NEG_INFINITY));
    }
    let log_z = rc_log_partition(g, params, caps)?;
    Ok(LogWeight(a.size() as f64 * params.log_odds() - log_z.0))
}

/// Full FKES distribution over the joint space, indexed by
/// `spin_index * 2^|E| + subset_index`.
pub fn fkes_distribution(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<Vec<f64>> {
    let q = params.q_int()?;
    let m = g.n_edges();
    let n_spins = n_spin_configs(g, q, caps)?;
    let dim = n_spins
        .checked_shl(m as u32)
        .ok_or_else(|| Error::parameter("joint space too large"))?;
    caps.check_joint(dim)?;
    let log_z = rc_log_partition(g, params, caps)?;
    let mut out = vec![0.0; dim];
    for s in 0..n_spins {
        let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
        let mono = monochromatic_edges(g, &sigma);
        for a in EdgeSubset::all(m) {
            if a.is_subset_of(&mono) {
                out[joint_index(s, &a)] =
                    (a.size() as f64 * params.log_odds() - log_z.0).exp();
            }
        }
    }
    Ok(out)
}
