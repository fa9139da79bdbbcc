//! Spectral gap via symmetrization + cyclic Jacobi, exact mixing time
//! via matrix powering, and the gap/mixing sandwich.

use crate::dynamics::StochasticMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::ModelParams;
use crate::Caps;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_NORM: f64 = 1e-13;

/// Eigenvalues of a dense symmetric matrix (row-major, n x n) by cyclic
/// Jacobi rotations. Errors out instead of returning silently
/// inaccurate values if the off-diagonal norm does not drop below the
/// threshold within the sweep budget.
pub fn jacobi_eigenvalues(mat: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(mat.len(), n * n);
    let mut a = mat.to_vec();
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };
    let scale = mat.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let tol = JACOBI_OFF_NORM * scale;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) < tol {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
            return Ok(eigs);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, off_norm: off_norm(&a) })
}

/// Eigenvalue summary of a reversible transition matrix.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// 1 - second largest modulus.
    pub gap: f64,
    /// max{|xi| : xi eigenvalue, one copy of the leading 1 removed}.
    pub second_largest_modulus: f64,
    /// Number of eigenvalues within 1e-9 of 1.
    pub multiplicity_of_one: usize,
    /// Asymmetry of the similarity-transformed matrix before averaging.
    pub symmetrization_err: f64,
}

/// Max over (x,y) of |pi(x)P(x,y) - pi(y)P(y,x)|.
pub fn check_reversible(p: &StochasticMatrix) -> f64 {
    p.detailed_balance_max_err()
}

fn symmetrize(p: &StochasticMatrix) -> (Vec<f64>, f64) {
    let n = p.dim();
    let pi = p.stationary();
    let sqrt_pi: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = sqrt_pi[i] / sqrt_pi[j] * p.get(i, j);
        }
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            asym = asym.max((s[i * n + j] - s[j * n + i]).abs());
            let avg = 0.5 * (s[i * n + j] + s[j * n + i]);
            s[i * n + j] = avg;
            s[j * n + i] = avg;
        }
    }
    (s, asym)
}

/// Spectral gap of a reversible stochastic matrix: symmetrize with the
/// stationary measure (a similarity transform, so the spectrum is
/// unchanged) and eigensolve.
pub fn spectral_gap(p: &StochasticMatrix, caps: &Caps) -> Result<SpectrumResult> {
    let rev = check_reversible(p);
    if rev > 1e-9 {
        return Err(Error::NonReversible(rev));
    }
    if p.dim() > caps.dense_eigen {
        return Err(Error::SizeLimit {
            what: "dense eigensolve".into(),
            requested: p.dim(),
            cap: caps.dense_eigen,
        });
    }
    let (s, asym) = symmetrize(p);
    let eigenvalues = jacobi_eigenvalues(&s, p.dim())?;
    let multiplicity_of_one = eigenvalues.iter().filter(|&&e| e > 1.0 - 1e-9).count();
    // drop one copy of the leading eigenvalue (= 1 for stochastic P)
    let slem = eigenvalues
        .iter()
        .skip(1)
        .map(|e| e.abs())
        .fold(0.0, f64::max);
    Ok(SpectrumResult {
        gap: 1.0 - slem,
        second_largest_modulus: slem,
        multiplicity_of_one,
        eigenvalues,
        symmetrization_err: asym,
    })
}

/// Independent route to the gap: 1 - ||P - S_pi||_pi, computed as the
/// largest-modulus eigenvalue of the symmetrized (P - S_pi).
pub fn gap_via_norm(p: &StochasticMatrix, caps: &Caps) -> Result<f64> {
    let rev = check_reversible(p);
    if rev > 1e-9 {
        return Err(Error::NonReversible(rev));
    }
    if p.dim() > caps.dense_eigen {
        return Err(Error::SizeLimit {
            what: "dense eigensolve".into(),
            requested: p.dim(),
            cap: caps.dense_eigen,
        });
    }
    let n = p.dim();
    let pi = p.stationary();
    let sqrt_pi: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = sqrt_pi[i] / sqrt_pi[j] * (p.get(i, j) - pi[j]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (s[i * n + j] + s[j * n + i]);
            s[i * n + j] = avg;
            s[j * n + i] = avg;
        }
    }
    let eigs = jacobi_eigenvalues(&s, n)?;
    let norm = eigs.iter().map(|e| e.abs()).fold(0.0, f64::max);
    Ok(1.0 - norm)
}

/// Mixing-time outcome from exact matrix powering.
#[derive(Debug, Clone)]
pub struct MixingResult {
    /// First t with max_x sum_y |P^t(x,y) - pi(y)| <= 1/e, if reached
    /// within the step cap.
    pub mixing_time: Option<u64>,
    /// (t, worst-start L1 distance) at every evaluated power, ascending in t.
    pub trajectory: Vec<(u64, f64)>,
}

/// Worst-start L1 distance of a matrix power from stationarity.
fn l1_distance(power: &StochasticMatrix) -> f64 {
    let n = power.dim();
    let pi = power.stationary();
    (0..n)
        .map(|x| {
            power
                .row(x)
                .iter()
                .zip(pi)
                .map(|(v, p)| (v - p).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

const MIXING_THRESHOLD: f64 = std::f64::consts::E.recip();

/// Exact mixing time: the L1 threshold 1/e on matrix powers (the
/// literal min-t definition; note this is twice the TV distance).
/// Powers are formed by repeated squaring; the crossing step is then
/// located by bisection, which is valid because the worst-start
/// distance is non-increasing in t.
pub fn exact_mixing_time(
    p: &StochasticMatrix,
    cap_steps: u64,
    caps: &Caps,
) -> Result<MixingResult> {
    if p.dim() > caps.powering {
        return Err(Error::SizeLimit {
            what: "mixing-time powering".into(),
            requested: p.dim(),
            cap: caps.powering,
        });
    }
    let mut trajectory: Vec<(u64, f64)> = Vec::new();
    // t = 0: identity start
    let ident = StochasticMatrix::identity(p.stationary().to_vec());
    let d0 = l1_distance(&ident);
    trajectory.push((0, d0));
    if d0 <= MIXING_THRESHOLD {
        return Ok(MixingResult { mixing_time: Some(0), trajectory });
    }

    // doubling phase: squares[k] = P^(2^k)
    let mut squares: Vec<StochasticMatrix> = vec![p.clone()];
    let mut k = 0usize;
    loop {
        let t = 1u64 << k;
        let d = l1_distance(&squares[k]);
        trajectory.push((t, d));
        if d <= MIXING_THRESHOLD {
            break;
        }
        if t >= cap_steps {
            trajectory.sort_by_key(|&(t, _)| t);
            return Ok(MixingResult { mixing_time: None, trajectory });
        }
        let next = squares[k].matmul(&squares[k]);
        squares.push(next);
        k += 1;
    }
    if k == 0 {
        trajectory.sort_by_key(|&(t, _)| t);
        return Ok(MixingResult { mixing_time: Some(1), trajectory });
    }

    // bisection in (2^(k-1), 2^k]
    let pow_t = |t: u64| -> StochasticMatrix {
        let mut acc: Option<StochasticMatrix> = None;
        for (bit, sq) in squares.iter().enumerate() {
            if t >> bit & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(m) => m.matmul(sq),
                });
            }
        }
        acc.expect("t > 0")
    };
    let (mut lo, mut hi) = (1u64 << (k - 1), 1u64 << k);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let d = l1_distance(&pow_t(mid));
        trajectory.push((mid, d));
        if d <= MIXING_THRESHOLD {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    trajectory.sort_by_key(|&(t, _)| t);
    Ok(MixingResult { mixing_time: Some(hi), trajectory })
}

/// Sequential worst-start L1 distances for t = 1..=t_max. Slow path
/// used to validate the bisection route and the monotonicity property.
pub fn l1_trajectory(p: &StochasticMatrix, t_max: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(t_max as usize);
    let mut power = p.clone();
    for _ in 0..t_max {
        out.push(l1_distance(&power));
        power = power.matmul(p);
    }
    out
}

/// Mixing-time sandwich (lambda^{-1} - 1, log(2e/pi_min) * lambda^{-1}).
pub fn sandwich_bounds(p: &StochasticMatrix, caps: &Caps) -> Result<(f64, f64)> {
    let spectrum = spectral_gap(p, caps)?;
    let pi_min = p.stationary().iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(sandwich_bounds_from(spectrum.gap, pi_min))
}

pub fn sandwich_bounds_from(gap: f64, pi_min: f64) -> (f64, f64) {
    let inv = 1.0 / gap;
    (inv - 1.0, (2.0 * std::f64::consts::E / pi_min).ln() * inv)
}

/// Closed-form lower bound on mu_min: (p(1-p))^{|E|} q^{-|V|}.
pub fn mu_min_lower_bound(g: &Graph, params: &ModelParams) -> f64 {
    let p = params.p();
    (p * (1.0 - p)).powi(g.n_edges() as i32) * params.q().powi(-(g.n_vertices() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sb_matrix, sw_matrix};
    use crate::graph::Graph;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn jacobi_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let eigs = jacobi_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((eigs[0] - 3.0).abs() < 1e-13);
        assert!((eigs[1] - 1.0).abs() < 1e-13);
        // diagonal passes through
        let eigs = jacobi_eigenvalues(&[5.0, 0.0, 0.0, -1.0], 2).unwrap();
        assert_eq!(eigs, vec![5.0, -1.0]);
    }

    #[test]
    fn jacobi_trace_preserved() {
        // random-ish symmetric 6x6
        let n = 6;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = ((i * 7 + j * 13 + 3) % 11) as f64 / 11.0;
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        let eigs = jacobi_eigenvalues(&m, n).unwrap();
        assert!((eigs.iter().sum::<f64>() - trace).abs() < 1e-11);
    }

    #[test]
    fn k2_gaps_match_closed_forms() {
        let g = Graph::path(2).unwrap();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        let spec = spectral_gap(&sb, &caps()).unwrap();
        // eigenvalues 1 and (1 + p(1-1/q))/2 = 0.625
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((spec.eigenvalues[1] - 0.625).abs() < 1e-12);
        assert!((spec.gap - 0.375).abs() < 1e-12);
        assert_eq!(spec.multiplicity_of_one, 1);

        let sw = sw_matrix(&g, &params, &caps()).unwrap();
        let spec = spectral_gap(&sw, &caps()).unwrap();
        assert!((spec.gap - 0.75).abs() < 1e-12);
    }

    #[test]
    fn identity_has_zero_gap() {
        let ident = StochasticMatrix::identity(vec![0.25; 4]);
        let spec = spectral_gap(&ident, &caps()).unwrap();
        assert!(spec.gap.abs() < 1e-12);
        assert_eq!(spec.multiplicity_of_one, 4);
    }

    #[test]
    fn projector_chain() {
        let pi = vec![0.5, 0.3, 0.2];
        let s = StochasticMatrix::stationary_projector(pi.clone());
        let spec = spectral_gap(&s, &caps()).unwrap();
        assert!((spec.gap - 1.0).abs() < 1e-12);
        assert!((gap_via_norm(&s, &caps()).unwrap() - 1.0).abs() < 1e-12);
        let mix = exact_mixing_time(&s, 1000, &caps()).unwrap();
        assert_eq!(mix.mixing_time, Some(1));
    }

    #[test]
    fn gap_routes_agree() {
        let g = Graph::cycle(3).unwrap();
        for (p, q) in [(0.2, 2.0), (0.5, 3.0), (0.8, 2.0)] {
            let params = ModelParams::new(p, q).unwrap();
            let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
            let a = spectral_gap(&sb, &caps()).unwrap().gap;
            let b = gap_via_norm(&sb, &caps()).unwrap();
            assert!((a - b).abs() < 1e-10, "p={p} q={q}: {a} vs {b}");
        }
    }

    #[test]
    fn nonreversible_rejected() {
        let mut m = StochasticMatrix::new_zero(2, vec![0.5, 0.5], false);
        m.set(0, 1, 1.0);
        m.set(1, 0, 0.2);
        m.set(1, 1, 0.8);
        assert!(matches!(spectral_gap(&m, &caps()), Err(Error::NonReversible(_))));
    }

    #[test]
    fn perturbation_shows_in_reversibility_check() {
        let g = Graph::path(2).unwrap();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let mut sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        assert!(check_reversible(&sb) < 1e-12);
        let eps = 1e-6;
        let v = sb.get(0, 1);
        sb.set(0, 1, v + eps);
        let violation = check_reversible(&sb);
        assert!((violation - eps * sb.stationary()[0]).abs() < 1e-12);
    }

    #[test]
    fn mixing_bisection_matches_sequential() {
        let g = Graph::cycle(3).unwrap();
        for (p, q) in [(0.3, 2.0), (0.6, 3.0)] {
            let params = ModelParams::new(p, q).unwrap();
            let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
            let mix = exact_mixing_time(&sb, 1_000_000, &caps()).unwrap();
            let tau = mix.mixing_time.unwrap();
            let traj = l1_trajectory(&sb, tau + 2);
            // traj[t-1] = d(t); tau is the first crossing
            assert!(traj[(tau - 1) as usize] <= MIXING_THRESHOLD);
            assert!(traj[(tau - 2) as usize] > MIXING_THRESHOLD);
            // monotone for a lazy chain
            for w in traj.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn k2_sandwich() {
        let g = Graph::path(2).unwrap();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let sb = sb_matrix(&g, &params, true, &caps()).unwrap();
        let (lo, hi) = sandwich_bounds(&sb, &caps()).unwrap();
        let tau = exact_mixing_time(&sb, 1_000_000, &caps())
            .unwrap()
            .mixing_time
            .unwrap() as f64;
        assert!(lo <= tau && tau <= hi, "{lo} <= {tau} <= {hi}");
        // lambda = 0.375, mu_min = 1/3
        assert!((lo - (1.0 / 0.375 - 1.0)).abs() < 1e-12);
        assert!((hi - (2.0 * std::f64::consts::E * 3.0).ln() / 0.375).abs() < 1e-10);
    }

    #[test]
    fn mu_min_bound_is_a_lower_bound() {
        let g = Graph::path(2).unwrap();
        let params = ModelParams::new(0.5, 2.0).unwrap();
        let bound = mu_min_lower_bound(&g, &params);
        assert!((bound - 0.0625).abs() < 1e-15);
        assert!(bound <= 1.0 / 3.0);
    }
}
