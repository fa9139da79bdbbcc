//! Operators on the joint Potts/random-cluster space: the projection
//! pair M / M*, the per-edge update T_e, and numerical certification of
//! their structural properties (idempotence, commutation, adjointness,
//! and the representation of Swendsen-Wang and single-bond through them).

use crate::dynamics::{single_edge_matrix, sw_matrix, StochasticMatrix};
use crate::error::{Error, Result};
use crate::graph::{components, EdgeSubset, Graph};
use crate::models::{
    fkes_distribution, joint_index, monochromatic_edges, n_spin_configs, rc_distribution,
    ModelParams, SpinConfig,
};
use crate::spectral::jacobi_eigenvalues;
use crate::suites::CheckReport;
use crate::Caps;

/// Sparse kernel between two indexed state spaces, stored as
/// (row, col, value) triples sorted by (row, col).
#[derive(Debug, Clone)]
pub struct SparseKernel {
    n_rows: usize,
    n_cols: usize,
    triples: Vec<(usize, usize, f64)>,
}

impl SparseKernel {
    pub fn from_triples(
        n_rows: usize,
        n_cols: usize,
        mut triples: Vec<(usize, usize, f64)>,
    ) -> Self {
        triples.sort_by_key(|&(r, c, _)| (r, c));
        // merge duplicates
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triples.len());
        for (r, c, v) in triples {
            debug_assert!(r < n_rows && c < n_cols);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        SparseKernel { n_rows, n_cols, triples: merged }
    }

    pub fn identity(n: usize) -> Self {
        SparseKernel {
            n_rows: n,
            n_cols: n,
            triples: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn triples(&self) -> &[(usize, usize, f64)] {
        &self.triples
    }

    pub fn nnz(&self) -> usize {
        self.triples.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.triples
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
            .map(|i| self.triples[i].2)
            .unwrap_or(0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_rows];
        for &(r, _, v) in &self.triples {
            sums[r] += v;
        }
        sums
    }

    pub fn row_sum_max_err(&self) -> f64 {
        self.row_sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn nonzeros_in_row(&self, row: usize) -> usize {
        self.triples.iter().filter(|&&(r, _, _)| r == row).count()
    }

    /// Kernel composition self * other by row-wise accumulation.
    pub fn matmul(&self, other: &SparseKernel) -> SparseKernel {
        assert_eq!(self.n_cols, other.n_rows);
        // CSR offsets for other
        let mut start = vec![0usize; other.n_rows + 1];
        for &(r, _, _) in &other.triples {
            start[r + 1] += 1;
        }
        for i in 0..other.n_rows {
            start[i + 1] += start[i];
        }
        let mut acc = vec![0.0f64; other.n_cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut out: Vec<(usize, usize, f64)> = Vec::new();
        let mut i = 0;
        while i < self.triples.len() {
            let row = self.triples[i].0;
            while i < self.triples.len() && self.triples[i].0 == row {
                let (_, k, v) = self.triples[i];
                for &(_, c, w) in &other.triples[start[k]..start[k + 1]] {
                    if acc[c] == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += v * w;
                }
                i += 1;
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != 0.0 {
                    out.push((row, c, acc[c]));
                }
                acc[c] = 0.0;
            }
            touched.clear();
        }
        SparseKernel { n_rows: self.n_rows, n_cols: other.n_cols, triples: out }
    }

    pub fn max_abs_diff(&self, other: &SparseKernel) -> f64 {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut worst = 0.0f64;
        let (mut i, mut j) = (0, 0);
        while i < self.triples.len() || j < other.triples.len() {
            let a = self.triples.get(i);
            let b = other.triples.get(j);
            match (a, b) {
                (Some(&(ra, ca, va)), Some(&(rb, cb, vb))) => {
                    if (ra, ca) == (rb, cb) {
                        worst = worst.max((va - vb).abs());
                        i += 1;
                        j += 1;
                    } else if (ra, ca) < (rb, cb) {
                        worst = worst.max(va.abs());
                        i += 1;
                    } else {
                        worst = worst.max(vb.abs());
                        j += 1;
                    }
                }
                (Some(&(_, _, va)), None) => {
                    worst = worst.max(va.abs());
                    i += 1;
                }
                (None, Some(&(_, _, vb))) => {
                    worst = worst.max(vb.abs());
                    j += 1;
                }
                (None, None) => break,
            }
        }
        worst
    }

    /// Max entrywise difference against a dense stochastic matrix.
    pub fn max_abs_diff_dense(&self, mat: &StochasticMatrix) -> f64 {
        assert_eq!(self.n_rows, mat.dim());
        assert_eq!(self.n_cols, mat.dim());
        let mut worst = 0.0f64;
        let mut it = self.triples.iter().peekable();
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let sparse = match it.peek() {
                    Some(&&(tr, tc, v)) if (tr, tc) == (r, c) => {
                        it.next();
                        v
                    }
                    _ => 0.0,
                };
                worst = worst.max((sparse - mat.get(r, c)).abs());
            }
        }
        worst
    }
}

fn joint_dims(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<(usize, usize, usize)> {
    let q = params.q_int()?;
    let m = g.n_edges();
    if m >= crate::graph::MAX_EDGES {
        return Err(Error::SizeLimit {
            what: "joint state space".into(),
            requested: m,
            cap: crate::graph::MAX_EDGES,
        });
    }
    let n_subsets = 1usize << m;
    caps.check_rc(n_subsets)?;
    let n_spins = n_spin_configs(g, q, caps)?;
    let dim = n_spins
        .checked_mul(n_subsets)
        .ok_or_else(|| Error::parameter("joint space too large"))?;
    caps.check_joint(dim)?;
    Ok((n_subsets, n_spins, dim))
}

/// M(B,(sigma,A)) = q^{-c(B)} 1(A=B) 1(sigma in Omega(B)): rows over
/// edge subsets, columns over the joint space; row B spreads its unit
/// mass uniformly over the q^{c(B)} compatible colorings.
pub fn build_m(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<SparseKernel> {
    let q = params.q_int()?;
    let (n_subsets, _, dim) = joint_dims(g, params, caps)?;
    let m = g.n_edges();
    let mut triples = Vec::new();
    for bits in 0..n_subsets {
        let b = EdgeSubset::from_bits(bits as u32, m);
        let (c, labels) = components(g, &b);
        let weight = (q as f64).powi(-(c as i32));
        let roots: Vec<usize> =
            (0..g.n_vertices()).filter(|&v| labels[v] == v).collect();
        for code in 0..q.pow(c as u32) {
            let mut color = vec![0usize; g.n_vertices()];
            let mut rest = code;
            for &r in &roots {
                color[r] = rest % q + 1;
                rest /= q;
            }
            let colors: Vec<usize> =
                (0..g.n_vertices()).map(|v| color[labels[v]]).collect();
            let sigma = SpinConfig::new(colors, q)?;
            triples.push((bits, joint_index(sigma.to_index(), &b), weight));
        }
    }
    Ok(SparseKernel::from_triples(n_subsets, dim, triples))
}

/// M*((sigma,A),B) = 1(A=B): the deterministic projection onto the RC
/// coordinate.
pub fn build_m_star(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<SparseKernel> {
    let (n_subsets, n_spins, dim) = joint_dims(g, params, caps)?;
    let m = g.n_edges();
    let mut triples = Vec::with_capacity(dim);
    for s in 0..n_spins {
        for bits in 0..n_subsets {
            let sub = EdgeSubset::from_bits(bits as u32, m);
            triples.push((joint_index(s, &sub), bits, 1.0));
        }
    }
    Ok(SparseKernel::from_triples(dim, n_subsets, triples))
}

/// T_e: keeps sigma, resamples the e-th bit of A; the edge is retained
/// with probability p only when sigma is monochromatic on e.
pub fn build_t_e(g: &Graph, params: &ModelParams, e: usize, caps: &Caps) -> Result<SparseKernel> {
    let q = params.q_int()?;
    let (n_subsets, n_spins, dim) = joint_dims(g, params, caps)?;
    let m = g.n_edges();
    if e >= m {
        return Err(Error::parameter(format!("edge index {e} out of range")));
    }
    let (e1, e2) = g.edge(e);
    let p = params.p();
    let mut triples = Vec::new();
    for s in 0..n_spins {
        let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
        let mono = sigma.color(e1) == sigma.color(e2);
        for bits in 0..n_subsets {
            let a = EdgeSubset::from_bits(bits as u32, m);
            let row = joint_index(s, &a);
            if mono {
                triples.push((row, joint_index(s, &a.with_edge(e)), p));
                triples.push((row, joint_index(s, &a.without_edge(e)), 1.0 - p));
            } else {
                triples.push((row, joint_index(s, &a.without_edge(e)), 1.0));
            }
        }
    }
    Ok(SparseKernel::from_triples(dim, dim, triples))
}

/// Product of all T_e in the given edge order.
pub fn product_t_with_order(
    g: &Graph,
    params: &ModelParams,
    order: &[usize],
    caps: &Caps,
) -> Result<SparseKernel> {
    let mut acc: Option<SparseKernel> = None;
    for &e in order {
        let t = build_t_e(g, params, e, caps)?;
        acc = Some(match acc {
            None => t,
            Some(k) => k.matmul(&t),
        });
    }
    acc.ok_or_else(|| Error::parameter("graph has no edges"))
}

/// Product of all T_e in ascending edge order.
pub fn product_t(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<SparseKernel> {
    let order: Vec<usize> = (0..g.n_edges()).collect();
    product_t_with_order(g, params, &order, caps)
}

/// Closed form of the product: ((sigma,A),(sigma,B)) entry is
/// 1(B in E(sigma)) p^{|B|} (1-p)^{|E(sigma)|-|B|}, independent of A.
pub fn product_t_closed_form(
    g: &Graph,
    params: &ModelParams,
    caps: &Caps,
) -> Result<SparseKernel> {
    let q = params.q_int()?;
    let (n_subsets, n_spins, dim) = joint_dims(g, params, caps)?;
    let m = g.n_edges();
    let p = params.p();
    let mut triples = Vec::new();
    for s in 0..n_spins {
        let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
        let mono = monochromatic_edges(g, &sigma);
        let k = mono.size();
        for bits in 0..n_subsets {
            let a = EdgeSubset::from_bits(bits as u32, m);
            let row = joint_index(s, &a);
            let mut sub = mono.bits() as usize;
            loop {
                let b = EdgeSubset::from_bits(sub as u32, m);
                let prob = p.powi(b.size() as i32) * (1.0 - p).powi((k - b.size()) as i32);
                triples.push((row, joint_index(s, &b), prob));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mono.bits() as usize;
            }
        }
    }
    Ok(SparseKernel::from_triples(dim, dim, triples))
}

/// Rank-one projector from the RC space onto the FKES measure:
/// S(B,(sigma,A)) = mu_bar(sigma,A). Test-only constructor.
pub fn build_s_mu_joint(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<SparseKernel> {
    let (n_subsets, _, dim) = joint_dims(g, params, caps)?;
    let mu_bar = fkes_distribution(g, params, caps)?;
    let mut triples = Vec::new();
    for b in 0..n_subsets {
        for (j, &w) in mu_bar.iter().enumerate() {
            if w > 0.0 {
                triples.push((b, j, w));
            }
        }
    }
    Ok(SparseKernel::from_triples(n_subsets, dim, triples))
}

/// Rank-one projector S_mu(A,B) = mu(B) on the RC space. Test-only.
pub fn build_s_mu(g: &Graph, params: &ModelParams, caps: &Caps) -> Result<SparseKernel> {
    let mu = rc_distribution(g, params, caps)?;
    let n = mu.len();
    let mut triples = Vec::new();
    for a in 0..n {
        for (b, &w) in mu.iter().enumerate() {
            if w > 0.0 {
                triples.push((a, b, w));
            }
        }
    }
    Ok(SparseKernel::from_triples(n, n, triples))
}

/// Detailed balance of a joint kernel w.r.t. mu_bar, restricted to the
/// support (states with positive mass).
fn mu_bar_adjointness_violation(kernel: &SparseKernel, mu_bar: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &(x, y, v) in kernel.triples() {
        if mu_bar[x] == 0.0 || mu_bar[y] == 0.0 {
            continue;
        }
        let back = kernel.get(y, x);
        worst = worst.max((mu_bar[x] * v - mu_bar[y] * back).abs());
    }
    worst
}

/// Eigenvalues of a joint kernel symmetrized by mu_bar on its support.
fn support_spectrum(kernel: &SparseKernel, mu_bar: &[f64]) -> Result<Vec<f64>> {
    let support: Vec<usize> = (0..mu_bar.len()).filter(|&i| mu_bar[i] > 0.0).collect();
    let pos: std::collections::HashMap<usize, usize> =
        support.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = support.len();
    let mut dense = vec![0.0f64; n * n];
    for &(x, y, v) in kernel.triples() {
        if let (Some(&i), Some(&j)) = (pos.get(&x), pos.get(&y)) {
            dense[i * n + j] = (mu_bar[x] / mu_bar[y]).sqrt() * v;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (dense[i * n + j] + dense[j * n + i]);
            dense[i * n + j] = avg;
            dense[j * n + i] = avg;
        }
    }
    jacobi_eigenvalues(&dense, n)
}

fn spectrum_01_violation(eigs: &[f64]) -> f64 {
    eigs.iter()
        .map(|&e| e.abs().min((e - 1.0).abs()))
        .fold(0.0, f64::max)
}

/// Counting identity behind the single-bond representation:
/// q^{-c(A)} |{sigma in Omega(A) : sigma monochromatic on e}| equals
/// 1/q + 1_e(A)(1 - 1/q). Returns the max violation over all (A, e).
pub fn counting_identity_violation(g: &Graph, q: usize) -> f64 {
    use crate::graph::connected_in;
    let m = g.n_edges();
    let n_spins = q.pow(g.n_vertices() as u32);
    let mut worst = 0.0f64;
    for a in EdgeSubset::all(m) {
        let (c, _) = components(g, &a);
        for e in 0..m {
            let (e1, e2) = g.edge(e);
            let count = (0..n_spins)
                .filter(|&s| {
                    let sigma = SpinConfig::from_index(s, g.n_vertices(), q);
                    crate::models::in_omega(g, &sigma, &a) && sigma.color(e1) == sigma.color(e2)
                })
                .count();
            let lhs = count as f64 * (q as f64).powi(-(c as i32));
            let ind = if connected_in(g, &a, e1, e2) { 1.0 } else { 0.0 };
            let rhs = 1.0 / q as f64 + ind * (1.0 - 1.0 / q as f64);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Numerically certifies the operator properties: adjointness in
/// L2(mu_bar), M M* = I, idempotence of M*M and every T_e, pairwise
/// commutation, and {0,1} spectra of the symmetrized projections.
pub fn verify_lemma_properties(
    g: &Graph,
    params: &ModelParams,
    caps: &Caps,
) -> Result<Vec<CheckReport>> {
    let m = g.n_edges();
    let mat_m = build_m(g, params, caps)?;
    let mat_m_star = build_m_star(g, params, caps)?;
    let mu_bar = fkes_distribution(g, params, caps)?;
    let t: Vec<SparseKernel> = (0..m)
        .map(|e| build_t_e(g, params, e, caps))
        .collect::<Result<_>>()?;

    let mstar_m = mat_m_star.matmul(&mat_m);
    let mut reports = Vec::new();

    reports.push(CheckReport::new(
        "self-adjoint-MstarM",
        mu_bar_adjointness_violation(&mstar_m, &mu_bar),
        1e-12,
    ));
    let adj_te = t
        .iter()
        .map(|te| mu_bar_adjointness_violation(te, &mu_bar))
        .fold(0.0, f64::max);
    reports.push(CheckReport::new("self-adjoint-Te", adj_te, 1e-12));

    let m_mstar = mat_m.matmul(&mat_m_star);
    reports.push(CheckReport::new(
        "MMstar-identity",
        m_mstar.max_abs_diff(&SparseKernel::identity(mat_m.n_rows())),
        1e-12,
    ));
    reports.push(CheckReport::new(
        "MstarM-idempotent",
        mstar_m.matmul(&mstar_m).max_abs_diff(&mstar_m),
        1e-12,
    ));

    let te_idem = t
        .iter()
        .map(|te| te.matmul(te).max_abs_diff(te))
        .fold(0.0, f64::max);
    reports.push(CheckReport::new("Te-idempotent", te_idem, 1e-12));

    let mut te_comm = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            te_comm = te_comm.max(t[i].matmul(&t[j]).max_abs_diff(&t[j].matmul(&t[i])));
        }
    }
    reports.push(CheckReport::new("Te-commute", te_comm, 1e-12));

    let mut te_spec = 0.0f64;
    for te in &t {
        te_spec = te_spec.max(spectrum_01_violation(&support_spectrum(te, &mu_bar)?));
    }
    reports.push(CheckReport::new("Te-spectrum-01", te_spec, 1e-10));
    reports.push(CheckReport::new(
        "MstarM-spectrum-01",
        spectrum_01_violation(&support_spectrum(&mstar_m, &mu_bar)?),
        1e-10,
    ));

    // left fixed point of each T_e
    let mut fix = 0.0f64;
    for te in &t {
        let mut out = vec![0.0f64; te.n_cols()];
        for &(r, c, v) in te.triples() {
            out[c] += mu_bar[r] * v;
        }
        for (o, b) in out.iter().zip(&mu_bar) {
            fix = fix.max((o - b).abs());
        }
    }
    reports.push(CheckReport::new("Te-preserves-mubar", fix, 1e-12));

    Ok(reports)
}

/// Certifies P_SW = M (prod T_e) M* and P_e = M T_e M* entrywise.
pub fn verify_representation(
    g: &Graph,
    params: &ModelParams,
    caps: &Caps,
) -> Result<Vec<CheckReport>> {
    let mat_m = build_m(g, params, caps)?;
    let mat_m_star = build_m_star(g, params, caps)?;
    let sw = sw_matrix(g, params, caps)?;
    let prod = product_t(g, params, caps)?;
    let sw_repr = mat_m.matmul(&prod).matmul(&mat_m_star);
    let mut reports = vec![CheckReport::new(
        "SW-representation",
        sw_repr.max_abs_diff_dense(&sw),
        1e-12,
    )];

    let mut worst = 0.0f64;
    for e in 0..g.n_edges() {
        let pe = single_edge_matrix(g, params, e, caps)?;
        let te = build_t_e(g, params, e, caps)?;
        let repr = mat_m.matmul(&te).matmul(&mat_m_star);
        worst = worst.max(repr.max_abs_diff_dense(&pe));
    }
    reports.push(CheckReport::new("Pe-representation", worst, 1e-12));
    Ok(reports)
}
