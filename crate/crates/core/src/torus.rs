//! Laplace eigenspaces of the flat torus `R^d / (2 pi Z)^d`.
//!
//! The eigenspace for eigenvalue `n` is spanned by `e^{i<k,x>}` with `k` on
//! the lattice shell `|k|^2 = n`. Observables are products of a
//! trigonometric-polynomial potential `sum_m c_m e^{i<m,x>}` and a degree-0
//! Fourier multiplier `g(xi/|xi|)`. Their compression to a shell is
//!
//! ```text
//! T_{k,l} = c_{l-k} g((k+l)/|k+l|)   (k != -l)
//! T_{k,l} = c_{l-k} mean_S(g)          (k  = -l)
//! ```
//!
//! followed by `(T + T*)/2`. The diagonal is `c_0 g(k/|k|)`, the torus average
//! of the symbol at frequency `k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::HaarSampler;
use crate::linalg::CMatrix;
use crate::qe::{quantum_variance, y_value, HermitianCompression, LevelInput, Reference, SequenceRun};
use crate::orbit::{moment2_exact, variance_y};
use crate::stats::{linear_fit, Accumulator, McEstimate};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

/// Off-diagonal quantization rule, recorded in experiment output.
pub const QUANTIZATION: &str =
    "T[k,l] = c[l-k] * g((k+l)/|k+l|), k+l=0 -> sphere mean of g; then (T+T*)/2";

/// Integer points on the sphere `|k|^2 = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeShell {
    dim: usize,
    n: u64,
    points: Vec<Vec<i64>>,
}

impl LatticeShell {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// `d_N`, the eigenvalue multiplicity.
    pub fn multiplicity(&self) -> usize {
        self.points.len()
    }

    /// Same points in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<LatticeShell> {
        let mut seen = vec![false; self.points.len()];
        if order.len() != self.points.len() || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidArgument("not a permutation of the shell".into()));
        }
        Ok(LatticeShell {
            dim: self.dim,
            n: self.n,
            points: order.iter().map(|&i| self.points[i].clone()).collect(),
        })
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn check_dim(dim: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "torus dimension {dim} outside [{MIN_DIM}, {MAX_DIM}]"
        )));
    }
    Ok(())
}

/// Depth-first enumeration of `|k|^2 = n` in lexicographic order.
pub fn lattice_shell(dim: usize, n: u64) -> Result<LatticeShell> {
    check_dim(dim)?;
    if n == 0 {
        return Err(Error::InvalidArgument("squared radius must be positive".into()));
    }
    fn go(rest: u64, slots: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slots == 1 {
            let r = isqrt(rest);
            if r * r == rest {
                if r == 0 {
                    cur.push(0);
                    out.push(cur.clone());
                    cur.pop();
                } else {
                    for v in [-(r as i64), r as i64] {
                        cur.push(v);
                        out.push(cur.clone());
                        cur.pop();
                    }
                }
            }
            return;
        }
        let m = isqrt(rest) as i64;
        for v in -m..=m {
            cur.push(v);
            go(rest - (v * v) as u64, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut points = Vec::new();
    go(n, dim, &mut Vec::with_capacity(dim), &mut points);
    if points.is_empty() {
        return Err(Error::NoLatticePoints { dim, n });
    }
    Ok(LatticeShell { dim, n, points })
}

/// `r_dim(n)` for `0 <= n <= n_max`, by convolving one coordinate at a time.
pub fn shell_counts(dim: usize, n_max: u64) -> Vec<u64> {
    let len = n_max as usize + 1;
    let mut counts = vec![0u64; len];
    counts[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u64; len];
        for (n, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            next[n] += c;
            let mut v = 1usize;
            while n + v * v < len {
                next[n + v * v] += 2 * c;
                v += 1;
            }
        }
        counts = next;
    }
    counts
}

/// `n` is a sum of two squares iff every prime `3 mod 4` divides it to an even
/// power.
pub fn is_sum_of_two_squares(mut n: u64) -> bool {
    if n == 0 {
        return true;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if p % 4 == 3 && e % 2 == 1 {
                return false;
            }
        }
        p += 1;
    }
    n % 4 != 3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySequence {
    pub dim: usize,
    pub n_max: u64,
    /// `(n, d_N)` for every nonempty shell passing the threshold.
    pub shells: Vec<(u64, u64)>,
    /// Least-squares slope of `ln d_N` against `ln sqrt(n)` over `n > n_max/2`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

pub fn multiplicity_sequence(dim: usize, n_max: u64, min_multiplicity: u64) -> Result<MultiplicitySequence> {
    check_dim(dim)?;
    let counts = shell_counts(dim, n_max);
    let shells: Vec<(u64, u64)> = counts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|&(_, &c)| c > 0 && c >= min_multiplicity)
        .map(|(n, &c)| (n as u64, c))
        .collect();
    let upper: Vec<&(u64, u64)> = shells.iter().filter(|(n, _)| 2 * n > n_max).collect();
    let xs: Vec<f64> = upper.iter().map(|(n, _)| (*n as f64).sqrt().ln()).collect();
    let ys: Vec<f64> = upper.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(MultiplicitySequence {
        dim,
        n_max,
        shells,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
    })
}

/// Real polynomial in the coordinates, evaluated on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereFunction {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

fn double_factorial_odd(a: u32) -> f64 {
    // (a - 1)!! for even a
    let mut acc = 1.0;
    let mut t = a as i64 - 1;
    while t > 1 {
        acc *= t as f64;
        t -= 2;
    }
    acc
}

impl SphereFunction {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if let Some((_, e)) = terms.iter().find(|(_, e)| e.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: e.len(),
            });
        }
        Ok(SphereFunction { dim, terms })
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        SphereFunction {
            dim,
            terms: vec![(c, vec![0; dim])],
        }
    }

    /// `x_a^2 - x_b^2`.
    pub fn quadratic_difference(dim: usize, a: usize, b: usize) -> Self {
        let mut ea = vec![0; dim];
        ea[a] = 2;
        let mut eb = vec![0; dim];
        eb[b] = 2;
        SphereFunction {
            dim,
            terms: vec![(1.0, ea), (-1.0, eb)],
        }
    }

    /// `x_a x_b`.
    pub fn product(dim: usize, a: usize, b: usize) -> Self {
        let mut e = vec![0; dim];
        e[a] += 1;
        e[b] += 1;
        SphereFunction {
            dim,
            terms: vec![(1.0, e)],
        }
    }

    /// `Re (x_a + i x_b)^4 = x_a^4 - 6 x_a^2 x_b^2 + x_b^4`, harmonic.
    pub fn quartic_harmonic(dim: usize, a: usize, b: usize) -> Self {
        let mono = |pa: u32, pb: u32| {
            let mut e = vec![0; dim];
            e[a] = pa;
            e[b] = pb;
            e
        };
        SphereFunction {
            dim,
            terms: vec![(1.0, mono(4, 0)), (-6.0, mono(2, 2)), (1.0, mono(0, 4))],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn plus(&self, other: &SphereFunction, scale: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(c, e)| (scale * c, e.clone())));
        Ok(SphereFunction { dim: self.dim, terms })
    }

    /// Value at `v / |v|`.
    pub fn eval_direction(&self, v: &[f64]) -> f64 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.terms
            .iter()
            .map(|(c, e)| {
                c * v
                    .iter()
                    .zip(e)
                    .map(|(x, &p)| (x / norm).powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Exact average over the unit sphere:
    /// `E x^a = prod (a_i - 1)!! / (d (d+2) ... (d + |a| - 2))` for even `a`.
    pub fn sphere_average(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                if e.iter().any(|p| p % 2 == 1) {
                    return 0.0;
                }
                let num: f64 = e.iter().map(|&p| double_factorial_odd(p)).product();
                let half: u32 = e.iter().sum::<u32>() / 2;
                let den: f64 = (0..half).map(|t| (self.dim + 2 * t as usize) as f64).product();
                c * num / den
            })
            .sum()
    }
}

// JSON maps need string keys; store the potential as a list of pairs.
mod potential_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vec<i64>, Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Vec<i64>, Complex64>, D::Error> {
        Vec::<(Vec<i64>, Complex64)>::deserialize(d).map(|v| v.into_iter().collect())
    }
}

/// Potential times degree-0 multiplier, with its Liouville average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusObservable {
    dim: usize,
    #[serde(with = "potential_entries")]
    potential: BTreeMap<Vec<i64>, Complex64>,
    multiplier: SphereFunction,
    liouville_state: f64,
}

impl TorusObservable {
    pub fn new(
        dim: usize,
        potential: BTreeMap<Vec<i64>, Complex64>,
        multiplier: SphereFunction,
    ) -> Result<Self> {
        if multiplier.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: multiplier.dim(),
            });
        }
        for (m, c) in &potential {
            if m.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.len(),
                });
            }
            let neg: Vec<i64> = m.iter().map(|x| -x).collect();
            let partner = potential.get(&neg).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "potential not real: c[{m:?}] and c[{neg:?}] are not conjugate"
                )));
            }
        }
        let c0 = potential.get(&vec![0; dim]).copied().unwrap_or_default();
        let liouville_state = c0.re * multiplier.sphere_average();
        Ok(TorusObservable {
            dim,
            potential,
            multiplier,
            liouville_state,
        })
    }

    /// Multiplication by the constant `a`.
    pub fn scalar(dim: usize, a: f64) -> Self {
        let mut potential = BTreeMap::new();
        potential.insert(vec![0; dim], Complex64::new(a, 0.0));
        TorusObservable::new(dim, potential, SphereFunction::constant(dim, 1.0))
            .expect("scalar observable is valid")
    }

    /// Pure Fourier multiplier `g(D/|D|)`.
    pub fn multiplier_only(multiplier: SphereFunction) -> Self {
        let dim = multiplier.dim();
        let mut potential = BTreeMap::new();
        potential.insert(vec![0; dim], Complex64::new(1.0, 0.0));
        TorusObservable::new(dim, potential, multiplier).expect("multiplier observable is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn multiplier(&self) -> &SphereFunction {
        &self.multiplier
    }

    pub fn liouville_state(&self) -> f64 {
        self.liouville_state
    }

    pub fn coefficient(&self, m: &[i64]) -> Complex64 {
        self.potential.get(m).copied().unwrap_or_default()
    }

    pub fn zero_mode(&self) -> f64 {
        self.coefficient(&vec![0; self.dim]).re
    }

    /// `c_0 * mean_S(g)` recomputed from the coefficients.
    pub fn recompute_liouville_state(&self) -> f64 {
        self.zero_mode() * self.multiplier.sphere_average()
    }
}

pub fn compress_observable(shell: &LatticeShell, obs: &TorusObservable) -> Result<HermitianCompression> {
    if shell.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            got: shell.dim(),
        });
    }
    let pts = shell.points();
    let d = pts.len();
    let g_mean = obs.multiplier().sphere_average();
    let mut t = CMatrix::zeros(d, d);
    let mut diff = vec![0i64; shell.dim()];
    let mut sum = vec![0f64; shell.dim()];
    for (a, k) in pts.iter().enumerate() {
        for (b, l) in pts.iter().enumerate() {
            for i in 0..shell.dim() {
                diff[i] = l[i] - k[i];
                sum[i] = (k[i] + l[i]) as f64;
            }
            let c = obs.coefficient(&diff);
            if c == Complex64::default() {
                continue;
            }
            let g = if sum.iter().all(|&s| s == 0.0) {
                g_mean
            } else {
                obs.multiplier().eval_direction(&sum)
            };
            t[(a, b)] = c * g;
        }
    }
    let t = (&t + t.adjoint()).scale(0.5);
    HermitianCompression::new(t, obs.liouville_state())
}

/// `(1/d_N) sum_k g(k/|k|)` for each test function.
pub fn direction_equidistribution(shell: &LatticeShell, tests: &[SphereFunction]) -> Vec<f64> {
    let d = shell.multiplicity() as f64;
    tests
        .iter()
        .map(|g| {
            shell
                .points()
                .iter()
                .map(|k| {
                    let v: Vec<f64> = k.iter().map(|&x| x as f64).collect();
                    g.eval_direction(&v)
                })
                .sum::<f64>()
                / d
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub n: u64,
    pub multiplicity: usize,
    pub trace_mean: f64,
    pub liouville_state: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub rows: Vec<WeylRow>,
    /// Slope of `ln |deviation|` against `ln n` over shells with nonzero
    /// deviation.
    pub trend_slope: Option<f64>,
}

/// `(1/d_N) Tr T_N - omega(A)` per shell.
pub fn local_weyl_check(shells: &[LatticeShell], obs: &TorusObservable) -> Result<WeylReport> {
    if shells.is_empty() {
        return Err(Error::InvalidArgument("no shells".into()));
    }
    let mut rows = Vec::with_capacity(shells.len());
    for shell in shells {
        if shell.dim() != obs.dim() {
            return Err(Error::DimensionMismatch {
                expected: obs.dim(),
                got: shell.dim(),
            });
        }
        // The diagonal of the compression is c_0 g(k/|k|); no matrix needed.
        let g_sum: f64 = direction_equidistribution(shell, std::slice::from_ref(obs.multiplier()))[0];
        let trace_mean = obs.zero_mode() * g_sum;
        rows.push(WeylRow {
            n: shell.n(),
            multiplicity: shell.multiplicity(),
            trace_mean,
            liouville_state: obs.liouville_state(),
            deviation: trace_mean - obs.liouville_state(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.deviation.abs() > 1e-14)
        .map(|r| ((r.n as f64).ln(), r.deviation.abs().ln()))
        .unzip();
    Ok(WeylReport {
        rows,
        trend_slope: linear_fit(&xs, &ys).map(|f| f.0),
    })
}

/// Per-shell statistics over random orthonormal bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellStats {
    pub n: u64,
    pub multiplicity: usize,
    pub trace_deviation: f64,
    pub p2: f64,
    /// `p2 / (d (d + 1))`.
    pub v_trace_expected: f64,
    pub v_trace: McEstimate,
    pub v_liouville: McEstimate,
    pub y: McEstimate,
    pub y_expected: f64,
    pub y_variance_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusExperiment {
    pub dim: usize,
    pub onb_draws: u64,
    pub quantization: String,
    pub liouville_state: f64,
    pub shells: Vec<ShellStats>,
    /// Built from the first basis drawn at every shell.
    pub sequence: SequenceRun,
}

/// Compresses the observable to every shell and samples `onb_draws` Haar
/// bases per shell. Shell `s`, draw `r` uses child stream `(s, r)`.
pub fn qe_experiment(
    shells: &[LatticeShell],
    obs: &TorusObservable,
    onb_draws: u64,
    sampler: &HaarSampler,
) -> Result<TorusExperiment> {
    if shells.is_empty() {
        return Err(Error::InvalidArgument("no shells".into()));
    }
    if onb_draws == 0 {
        return Err(Error::InvalidArgument("need at least one basis per shell".into()));
    }
    let mut stats = Vec::with_capacity(shells.len());
    let mut levels = Vec::with_capacity(shells.len());
    for (idx, shell) in shells.iter().enumerate() {
        let t = compress_observable(shell, obs)?;
        let d = t.dim();
        let s = t.spectrum();
        let level_sampler = sampler.with_dim(d).child(idx as u64);
        let (mut vt, mut vl, mut ya) = (Accumulator::default(), Accumulator::default(), Accumulator::default());
        let mut first = None;
        for r in 0..onb_draws {
            let u = level_sampler.child(r).sample_unitary();
            let v_trace = quantum_variance(&t, &u, Reference::TraceMean)?;
            let v_liou = quantum_variance(&t, &u, Reference::Liouville)?;
            let y = y_value(&t, &u)?;
            vt.push(v_trace);
            vl.push(v_liou);
            ya.push(y);
            if first.is_none() {
                first = Some((y, v_liou));
            }
        }
        let (y0, vl0) = first.expect("at least one draw");
        let p2 = s.p(2);
        stats.push(ShellStats {
            n: shell.n(),
            multiplicity: d,
            trace_deviation: t.trace_mean() - obs.liouville_state(),
            p2,
            v_trace_expected: p2 / (d as f64 * (d as f64 + 1.0)),
            v_trace: vt.estimate(),
            v_liouville: vl.estimate(),
            y: ya.estimate(),
            y_expected: moment2_exact(s),
            y_variance_expected: variance_y(s),
        });
        levels.push(LevelInput {
            dim: d,
            y: y0,
            y_mean: moment2_exact(s),
            y_variance: variance_y(s),
            trace_mean: t.trace_mean(),
            v_liouville: Some(vl0),
        });
    }
    Ok(TorusExperiment {
        dim: obs.dim(),
        onb_draws,
        quantization: QUANTIZATION.to_string(),
        liouville_state: obs.liouville_state(),
        shells: stats,
        sequence: SequenceRun::from_levels(&levels, sampler),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn shell_examples() {
        assert_eq!(lattice_shell(2, 25).unwrap().multiplicity(), 12);
        let s = lattice_shell(4, 1).unwrap();
        assert_eq!(s.multiplicity(), 8);
        assert_eq!(lattice_shell(2, 3), Err(Error::NoLatticePoints { dim: 2, n: 3 }));
        assert!(lattice_shell(7, 3).is_err());
        assert!(lattice_shell(1, 3).is_err());
        assert!(lattice_shell(3, 0).is_err());
    }

    #[test]
    fn shell_points_are_sorted_and_on_sphere() {
        let s = lattice_shell(3, 9).unwrap();
        assert!(s.points().windows(2).all(|w| w[0] < w[1]));
        assert!(s.points().iter().all(|k| k.iter().map(|x| x * x).sum::<i64>() == 9));
    }

    #[test]
    fn shell_is_symmetric() {
        let s = lattice_shell(3, 14).unwrap();
        let set: BTreeSet<Vec<i64>> = s.points().iter().cloned().collect();
        for k in s.points() {
            let mut flipped = k.clone();
            flipped[1] = -flipped[1];
            assert!(set.contains(&flipped));
            let swapped = vec![k[2], k[0], k[1]];
            assert!(set.contains(&swapped));
        }
    }

    #[test]
    fn counts_match_enumeration() {
        for dim in 2..=5 {
            let counts = shell_counts(dim, 30);
            for n in 1..=30u64 {
                let enumerated = lattice_shell(dim, n).map(|s| s.multiplicity() as u64).unwrap_or(0);
                assert_eq!(counts[n as usize], enumerated, "dim {dim}, n {n}");
            }
        }
    }

    #[test]
    fn two_squares_filter() {
        let counts = shell_counts(2, 500);
        for n in 1..=500u64 {
            assert_eq!(is_sum_of_two_squares(n), counts[n as usize] > 0, "n = {n}");
        }
    }

    #[test]
    fn threshold_above_everything_is_empty() {
        let seq = multiplicity_sequence(3, 50, 1_000_000).unwrap();
        assert!(seq.shells.is_empty());
        assert!(seq.slope.is_none());
    }

    #[test]
    fn sphere_averages() {
        for dim in 2..=6 {
            assert_eq!(SphereFunction::constant(dim, 2.5).sphere_average(), 2.5);
            let mut e = vec![0; dim];
            e[0] = 2;
            let f = SphereFunction::new(dim, vec![(1.0, e.clone())]).unwrap();
            assert!((f.sphere_average() - 1.0 / dim as f64).abs() < 1e-15);
            e[0] = 4;
            let f = SphereFunction::new(dim, vec![(1.0, e)]).unwrap();
            let want = 3.0 / (dim as f64 * (dim as f64 + 2.0));
            assert!((f.sphere_average() - want).abs() < 1e-15);
            assert_eq!(SphereFunction::quartic_harmonic(dim, 0, 1).sphere_average(), 0.0);
        }
    }

    #[test]
    fn observable_validation() {
        let mut pot = BTreeMap::new();
        pot.insert(vec![1, 0], Complex64::new(0.5, 0.2));
        assert!(TorusObservable::new(2, pot.clone(), SphereFunction::constant(2, 1.0)).is_err());
        pot.insert(vec![-1, 0], Complex64::new(0.5, -0.2));
        pot.insert(vec![0, 0], Complex64::new(2.0, 0.0));
        let g = SphereFunction::constant(2, 1.0).plus(&SphereFunction::quadratic_difference(2, 0, 1), 0.3).unwrap();
        let obs = TorusObservable::new(2, pot, g).unwrap();
        assert!((obs.liouville_state() - 2.0).abs() < 1e-15);
        assert!((obs.recompute_liouville_state() - obs.liouville_state()).abs() < 1e-10);
    }

    #[test]
    fn pure_multiplier_is_diagonal() {
        let shell = lattice_shell(3, 6).unwrap();
        let g = SphereFunction::quadratic_difference(3, 0, 2);
        let t = compress_observable(&shell, &TorusObservable::multiplier_only(g.clone())).unwrap();
        for (a, k) in shell.points().iter().enumerate() {
            let v: Vec<f64> = k.iter().map(|&x| x as f64).collect();
            for b in 0..shell.multiplicity() {
                let want = if a == b { g.eval_direction(&v) } else { 0.0 };
                assert!((t.matrix()[(a, b)] - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_potential_has_coefficient_entries() {
        let shell = lattice_shell(2, 5).unwrap();
        let mut pot = BTreeMap::new();
        pot.insert(vec![0, 0], Complex64::new(0.7, 0.0));
        pot.insert(vec![2, 0], Complex64::new(0.0, 0.25));
        pot.insert(vec![-2, 0], Complex64::new(0.0, -0.25));
        let obs = TorusObservable::new(2, pot, SphereFunction::constant(2, 1.0)).unwrap();
        let t = compress_observable(&shell, &obs).unwrap();
        let d = shell.multiplicity();
        let tr: f64 = (0..d).map(|i| t.matrix()[(i, i)].re).sum();
        assert!((tr - d as f64 * 0.7).abs() < 1e-12);
        for (a, k) in shell.points().iter().enumerate() {
            for (b, l) in shell.points().iter().enumerate() {
                let m: Vec<i64> = l.iter().zip(k).map(|(x, y)| x - y).collect();
                assert!((t.matrix()[(a, b)] - obs.coefficient(&m)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_observable_weyl_is_exact() {
        let shells: Vec<_> = [3u64, 5, 6].iter().map(|&n| lattice_shell(3, n).unwrap()).collect();
        let r = local_weyl_check(&shells, &TorusObservable::scalar(3, 1.75)).unwrap();
        assert!(r.rows.iter().all(|row| row.deviation.abs() < 1e-14));
    }

    #[test]
    fn odd_test_functions_vanish_by_symmetry() {
        for n in [5u64, 25, 50] {
            let shell = lattice_shell(2, n).unwrap();
            let v = direction_equidistribution(
                &shell,
                &[SphereFunction::quadratic_difference(2, 0, 1), SphereFunction::product(2, 0, 1)],
            );
            assert!(v.iter().all(|x| x.abs() < 1e-15), "{v:?}");
        }
    }

    #[test]
    fn permuted_shell_rejects_bad_order() {
        let shell = lattice_shell(2, 5).unwrap();
        assert!(shell.permuted(&[0, 0, 1, 2, 3, 4, 5, 6]).is_err());
        assert!(shell.permuted(&[0]).is_err());
    }
}
