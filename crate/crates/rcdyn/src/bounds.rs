//! Closed-form bound evaluators and exact width computations:
//! bandwidth and linear-width on small graphs, the tree gap formula,
//! the linear-width gap bound, the mixing comparison factor, and the
//! torus upper-bound calculator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::ModelParams;

/// An exact width value together with a witness ordering achieving it.
#[derive(Debug, Clone, Serialize)]
pub struct WidthResult {
    pub width: usize,
    /// Vertex ordering for bandwidth, edge ordering for linear-width.
    pub witness: Vec<usize>,
}

/// Max index stretch of an edge under the given vertex ordering
/// (`order[i]` = vertex placed at position i).
pub fn bandwidth_of_ordering(g: &Graph, order: &[usize]) -> usize {
    let mut pos = vec![0usize; g.n_vertices()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    g.edges()
        .iter()
        .map(|&(u, v)| pos[u].abs_diff(pos[v]))
        .max()
        .unwrap_or(0)
}

/// Exact bandwidth by branch-and-bound over vertex orderings.
pub fn bandwidth_exact(g: &Graph) -> Result<WidthResult> {
    let n = g.n_vertices();
    if n > 10 {
        return Err(Error::SizeLimit { what: "bandwidth".into(), requested: n, cap: 10 });
    }
    if g.n_edges() == 0 {
        return Ok(WidthResult { width: 0, witness: (0..n).collect() });
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut best = bandwidth_of_ordering(g, &identity);
    let mut best_order = identity;

    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    // stretch among already-placed endpoints, maintained incrementally
    fn descend(
        g: &Graph,
        order: &mut Vec<usize>,
        used: &mut [bool],
        current_max: usize,
        best: &mut usize,
        best_order: &mut Vec<usize>,
    ) {
        let n = g.n_vertices();
        if order.len() == n {
            if current_max < *best {
                *best = current_max;
                *best_order = order.clone();
            }
            return;
        }
        let pos = order.len();
        for v in 0..n {
            if used[v] {
                continue;
            }
            let mut new_max = current_max;
            let mut feasible = true;
            for &(a, b) in g.edges() {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if let Some(p) = order.iter().position(|&x| x == other) {
                    new_max = new_max.max(pos - p);
                    if new_max >= *best {
                        feasible = false;
                        break;
                    }
                }
            }
            if !feasible {
                continue;
            }
            order.push(v);
            used[v] = true;
            descend(g, order, used, new_max, best, best_order);
            order.pop();
            used[v] = false;
        }
    }
    descend(g, &mut order, &mut used, 0, &mut best, &mut best_order);
    Ok(WidthResult { width: best, witness: best_order })
}

/// Number of vertices incident both to an edge inside `prefix` and to
/// one outside it.
pub fn boundary_size(g: &Graph, prefix: u32) -> usize {
    let m = g.n_edges();
    let mut in_prefix = vec![false; g.n_vertices()];
    let mut in_suffix = vec![false; g.n_vertices()];
    for e in 0..m {
        let (u, v) = g.edge(e);
        if prefix >> e & 1 == 1 {
            in_prefix[u] = true;
            in_prefix[v] = true;
        } else {
            in_suffix[u] = true;
            in_suffix[v] = true;
        }
    }
    (0..g.n_vertices()).filter(|&v| in_prefix[v] && in_suffix[v]).count()
}

/// Max boundary over the prefixes of an edge ordering.
pub fn linear_width_of_ordering(g: &Graph, order: &[usize]) -> usize {
    let mut prefix = 0u32;
    let mut worst = 0;
    for &e in order {
        prefix |= 1 << e;
        worst = worst.max(boundary_size(g, prefix));
    }
    worst
}

/// Exact linear-width by dynamic programming over edge subsets: the
/// cost of a prefix depends only on the set of edges in it.
pub fn linear_width_exact(g: &Graph) -> Result<WidthResult> {
    let m = g.n_edges();
    if m > 8 {
        return Err(Error::SizeLimit { what: "linear-width".into(), requested: m, cap: 8 });
    }
    if m == 0 {
        return Ok(WidthResult { width: 0, witness: vec![] });
    }
    let n_sets = 1usize << m;
    let boundary: Vec<usize> = (0..n_sets).map(|s| boundary_size(g, s as u32)).collect();
    let mut best = vec![usize::MAX; n_sets];
    best[0] = 0;
    // subsets in increasing popcount order via plain index order works:
    // s \ {e} < s numerically
    for s in 1..n_sets {
        let mut from = usize::MAX;
        for e in 0..m {
            if s >> e & 1 == 1 {
                from = from.min(best[s & !(1 << e)]);
            }
        }
        best[s] = from.max(boundary[s]);
    }
    // reconstruct ordering backwards from the full set
    let mut witness = Vec::with_capacity(m);
    let mut s = n_sets - 1;
    while s != 0 {
        let e = (0..m)
            .filter(|&e| s >> e & 1 == 1)
            .min_by_key(|&e| best[s & !(1 << e)])
            .unwrap();
        witness.push(e);
        s &= !(1 << e);
    }
    witness.reverse();
    Ok(WidthResult { width: best[n_sets - 1], witness })
}

/// Upper bound 2 L^{d-1} + 1 on the linear-width of the d-dimensional
/// torus of side length L.
pub fn torus_linear_width_bound(l: usize, d: usize) -> Result<usize> {
    if l < 2 || d < 1 {
        return Err(Error::parameter("need L >= 2 and d >= 1"));
    }
    Ok(2 * l.pow((d - 1) as u32) + 1)
}

/// log of the inverse-gap bound 4 |E|^2 q^{l+1} for graphs with
/// linear-width at most l.
pub fn width_gap_bound(n_edges: usize, q: f64, ell: usize) -> f64 {
    (4.0 * (n_edges * n_edges) as f64).ln() + (ell + 1) as f64 * q.ln()
}

fn require_tree(g: &Graph) -> Result<()> {
    if g.is_tree() {
        Ok(())
    } else {
        Err(Error::NotATree)
    }
}

/// Exact lazy single-bond gap on a tree: (1 - p(1 - 1/q)) / (2 |E|).
pub fn tree_gap_exact(g: &Graph, params: &ModelParams) -> Result<f64> {
    require_tree(g)?;
    Ok((1.0 - params.p() * (1.0 - 1.0 / params.q())) / (2.0 * g.n_edges() as f64))
}

/// Inverse-gap bound for Swendsen-Wang on a tree:
/// 2 (1 - p(1 - 1/q))^{-1} |E|.
pub fn sw_tree_bound(g: &Graph, params: &ModelParams) -> Result<f64> {
    require_tree(g)?;
    Ok(2.0 * g.n_edges() as f64 / (1.0 - params.p() * (1.0 - 1.0 / params.q())))
}

/// Mixing-time comparison factor:
/// 3 + |E| log(1/(p(1-p))) + |V| log q.
pub fn mixing_comparison_factor(g: &Graph, params: &ModelParams) -> f64 {
    let p = params.p();
    3.0 + g.n_edges() as f64 * (1.0 / (p * (1.0 - p))).ln()
        + g.n_vertices() as f64 * params.q().ln()
}

pub fn k1(p: f64) -> f64 {
    (1.0 + (1.0 / (p * (1.0 - p))).ln()).ln()
}

pub fn k2(q: f64) -> f64 {
    4.0 + 3.0 * q.ln() + (1.0 + q.ln()).ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusBound {
    pub k1: f64,
    pub k2: f64,
    /// log of the mixing-time bound: k1(p) + k2(q) L^{d-1}.
    pub log_bound: f64,
}

/// Torus single-bond mixing-time upper bound, returned in log scale
/// because the plain value overflows for modest L.
pub fn torus_upper_bound(params: &ModelParams, l: usize, d: usize) -> Result<TorusBound> {
    if l < 2 || d < 2 {
        return Err(Error::parameter("torus bound needs L >= 2 and d >= 2"));
    }
    params.q_int()?;
    let k1v = k1(params.p());
    let k2v = k2(params.q());
    Ok(TorusBound {
        k1: k1v,
        k2: k2v,
        log_bound: k1v + k2v * (l as f64).powi(d as i32 - 1),
    })
}

/// Leading term (1/d) log q of the Potts transition temperature; the
/// O(q^{-1/d}) correction is not quantified.
pub fn potts_transition_beta_leading(q: f64, d: usize) -> Result<f64> {
    if q < 2.0 || d < 2 {
        return Err(Error::parameter("need q >= 2 and d >= 2"));
    }
    Ok(q.ln() / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::sb_matrix;
    use crate::spectral::spectral_gap;
    use crate::Caps;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let smaller = permutations(n - 1);
        let mut out = Vec::new();
        for p in smaller {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn bandwidth_small_cases() {
        assert_eq!(bandwidth_exact(&Graph::path(5).unwrap()).unwrap().width, 1);
        for l in 4..=8 {
            let r = bandwidth_exact(&Graph::cycle(l).unwrap()).unwrap();
            assert_eq!(r.width, 2, "cycle C{l}");
            assert_eq!(bandwidth_of_ordering(&Graph::cycle(l).unwrap(), &r.witness), 2);
        }
        assert_eq!(bandwidth_exact(&Graph::complete(4).unwrap()).unwrap().width, 3);
    }

    #[test]
    fn bandwidth_matches_brute_force() {
        for g in [
            Graph::cycle(5).unwrap(),
            Graph::complete(4).unwrap(),
            Graph::star(4).unwrap(),
            Graph::torus(2, 2).unwrap(),
        ] {
            let brute = permutations(g.n_vertices())
                .into_iter()
                .map(|p| bandwidth_of_ordering(&g, &p))
                .min()
                .unwrap();
            let r = bandwidth_exact(&g).unwrap();
            assert_eq!(r.width, brute);
            assert_eq!(bandwidth_of_ordering(&g, &r.witness), r.width);
        }
    }

    #[test]
    fn linear_width_small_cases() {
        // single edge: the only prefix with a nonempty suffix is none
        assert_eq!(linear_width_exact(&Graph::path(2).unwrap()).unwrap().width, 0);
        assert_eq!(linear_width_exact(&Graph::path(4).unwrap()).unwrap().width, 1);
        assert_eq!(linear_width_exact(&Graph::cycle(4).unwrap()).unwrap().width, 2);
    }

    #[test]
    fn linear_width_matches_brute_force() {
        for g in [
            Graph::path(4).unwrap(),
            Graph::cycle(4).unwrap(),
            Graph::cycle(5).unwrap(),
            Graph::star(4).unwrap(),
        ] {
            let brute = permutations(g.n_edges())
                .into_iter()
                .map(|p| linear_width_of_ordering(&g, &p))
                .min()
                .unwrap();
            let r = linear_width_exact(&g).unwrap();
            assert_eq!(r.width, brute);
            assert_eq!(linear_width_of_ordering(&g, &r.witness), r.width);
        }
    }

    #[test]
    fn width_caps() {
        assert!(bandwidth_exact(&Graph::cycle(11).unwrap()).is_err());
        assert!(linear_width_exact(&Graph::cycle(9).unwrap()).is_err());
    }

    #[test]
    fn torus_width_bound_values() {
        assert_eq!(torus_linear_width_bound(3, 2).unwrap(), 7);
        assert_eq!(torus_linear_width_bound(2, 2).unwrap(), 5);
        // small cycles stay below the d=1 bound
        for l in 4..=8 {
            let lw = linear_width_exact(&Graph::cycle(l).unwrap()).unwrap().width;
            assert!(lw <= torus_linear_width_bound(l, 1).unwrap());
        }
    }

    #[test]
    fn width_gap_bound_values() {
        assert!((width_gap_bound(3, 2.0, 2) - 288.0f64.ln()).abs() < 1e-12);
        assert!((width_gap_bound(1, 2.0, 0) - 8.0f64.ln()).abs() < 1e-12);
        // K2: exact inverse gap 1/0.375 <= 8
        assert!((1.0f64 / 0.375).ln() <= width_gap_bound(1, 2.0, 0));
    }

    #[test]
    fn tree_formula_matches_eigensolver() {
        let caps = Caps::default();
        for g in [Graph::path(2).unwrap(), Graph::path(4).unwrap(), Graph::star(3).unwrap()] {
            for (p, q) in [(0.5, 2.0), (0.3, 3.0)] {
                let params = ModelParams::new(p, q).unwrap();
                let formula = tree_gap_exact(&g, &params).unwrap();
                let sb = sb_matrix(&g, &params, true, &caps).unwrap();
                let eig = spectral_gap(&sb, &caps).unwrap().gap;
                assert!((formula - eig).abs() < 1e-10, "|E|={} p={p} q={q}", g.n_edges());
            }
        }
        // quoted cases
        let p2 = ModelParams::new(0.5, 2.0).unwrap();
        assert!((tree_gap_exact(&Graph::path(2).unwrap(), &p2).unwrap() - 0.375).abs() < 1e-15);
        assert!((tree_gap_exact(&Graph::path(4).unwrap(), &p2).unwrap() - 0.125).abs() < 1e-15);
        let p3 = ModelParams::new(0.3, 3.0).unwrap();
        let star = Graph::star(3).unwrap();
        assert!((tree_gap_exact(&star, &p3).unwrap() - 0.8 / 6.0).abs() < 1e-15);
        assert!(tree_gap_exact(&Graph::cycle(3).unwrap(), &p2).is_err());
    }

    #[test]
    fn sw_tree_bound_holds() {
        let caps = Caps::default();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        for g in [Graph::path(2).unwrap(), Graph::path(4).unwrap()] {
            let bound = sw_tree_bound(&g, &params).unwrap();
            let sw = crate::dynamics::sw_matrix(&g, &params, &caps).unwrap();
            let gap = spectral_gap(&sw, &caps).unwrap().gap;
            assert!(1.0 / gap <= bound + 1e-9, "|E|={}", g.n_edges());
        }
        let k2g = Graph::path(2).unwrap();
        assert!((sw_tree_bound(&k2g, &params).unwrap() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_factor_value() {
        let g = Graph::path(2).unwrap();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let f = mixing_comparison_factor(&g, &params);
        assert!((f - 5.772588722239782).abs() < 1e-9);
        assert!(f >= 3.0);
    }

    #[test]
    fn torus_bound_constants() {
        assert!((k1(0.5) - 0.869742).abs() < 1e-6);
        assert!((k2(2.0) - 6.6060306).abs() < 1e-6);
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let b = torus_upper_bound(&params, 2, 2).unwrap();
        assert!((b.log_bound - 14.081803).abs() < 1e-5);
        assert!(torus_upper_bound(&params, 2, 1).is_err());
    }

    #[test]
    fn beta_leading_term() {
        assert!((potts_transition_beta_leading(2.0, 2).unwrap() - 0.346574).abs() < 1e-6);
        let e2 = (std::f64::consts::E).powi(2);
        assert!((potts_transition_beta_leading(e2, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            potts_transition_beta_leading(3.0, 2).unwrap()
                > potts_transition_beta_leading(2.0, 2).unwrap()
        );
    }
}
