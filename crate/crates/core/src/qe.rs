//! Quantum variances of orthonormal bases of an eigenspace.
//!
//! An observable cut down to a `d`-dimensional eigenspace is a Hermitian
//! matrix `T`. For an orthonormal basis given by the columns `u_j` of a
//! unitary `U`,
//!
//! ```text
//! V(U) = (1/d) sum_j |<T u_j, u_j> - ref|^2
//! ```
//!
//! where `ref` is either the limit state `omega(A)` or the trace mean
//! `(1/d) Tr T`. With the trace-mean reference `d V = Y`, the squared norm of
//! the diagonal of `T` in the basis `U`, which is the orbit variable of
//! [`crate::orbit`].

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{HaarSampler, GENERATOR};
use crate::linalg::{hermitian_defect, max_abs, unitarity_defect, CMatrix};
use crate::orbit::{center_spectrum, moment2_exact, moment_map_diagonal, variance_y, SpectrumVector};
use crate::stats::CompensatedSum;

/// Relative tolerance on `|T - T*|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Share of `sum 1/d_n` carried by the upper half of the levels below which a
/// run is flagged as being in the summable (Borel-Cantelli) regime.
pub const BOREL_CANTELLI_TAIL_SHARE: f64 = 0.05;

/// Hermitian matrix with its cached spectral decomposition and target state.
#[derive(Debug, Clone)]
pub struct HermitianCompression {
    matrix: CMatrix,
    spectrum: SpectrumVector,
    eigenvectors: CMatrix,
    liouville_state: f64,
}

impl HermitianCompression {
    pub fn new(matrix: CMatrix, liouville_state: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let d = matrix.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(HermitianCompression {
            matrix,
            spectrum: center_spectrum(&values)?,
            eigenvectors,
            liouville_state,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &SpectrumVector {
        &self.spectrum
    }

    /// Columns are eigenvectors, ordered like `spectrum().lambda()`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn liouville_state(&self) -> f64 {
        self.liouville_state
    }

    /// `(1/d) Tr T` read off the matrix diagonal.
    pub fn trace_mean(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum::<f64>() / self.dim() as f64
    }

    /// `V* T V` for a unitary `V`.
    pub fn conjugated(&self, v: &CMatrix) -> Result<Self> {
        check_unitary(v, self.dim())?;
        let m = v.adjoint() * &self.matrix * v;
        let m = (&m + m.adjoint()).scale(0.5);
        HermitianCompression::new(m, self.liouville_state)
    }
}

fn check_unitary(u: &CMatrix, d: usize) -> Result<()> {
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u.nrows(),
        });
    }
    let defect = unitarity_defect(u);
    if defect > crate::orbit::UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    Liouville,
    TraceMean,
}

/// `<T u_j, u_j>` for every column of `U`.
pub fn diagonal_values(t: &HermitianCompression, u: &CMatrix) -> Result<Vec<f64>> {
    check_unitary(u, t.dim())?;
    let tu = t.matrix() * u;
    Ok((0..u.ncols())
        .map(|j| u.column(j).dotc(&tu.column(j)).re)
        .collect())
}

/// `(1/d) sum_j |<T u_j, u_j> - r|^2`, evaluated as `<(T - r) u_j, u_j>` so
/// that scalar `T = r` gives exactly zero.
pub fn quantum_variance(t: &HermitianCompression, u: &CMatrix, reference: Reference) -> Result<f64> {
    check_unitary(u, t.dim())?;
    let r = match reference {
        Reference::Liouville => t.liouville_state(),
        Reference::TraceMean => t.trace_mean(),
    };
    let shifted = t.matrix() - CMatrix::identity(t.dim(), t.dim()).scale(r);
    let tu = shifted * u;
    Ok((0..u.ncols())
        .map(|j| u.column(j).dotc(&tu.column(j)).re.powi(2))
        .sum::<f64>()
        / t.dim() as f64)
}

/// `Y = |J(W^T D(Lambda) conj(W))|^2` with `W = V* U` the basis expressed in
/// the eigenbasis of `T`.
pub fn y_value(t: &HermitianCompression, u: &CMatrix) -> Result<f64> {
    check_unitary(u, t.dim())?;
    let w = t.eigenvectors().adjoint() * u;
    let x = moment_map_diagonal(&w.transpose(), t.spectrum())?;
    Ok(x.iter().map(|v| v * v).sum())
}

/// Probability measure with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<(f64, f64)>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(_, w)| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument("negative or non-finite weight".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(EmpiricalMeasure { atoms })
    }

    /// Weight `1/d` at every point.
    pub fn uniform(points: &[f64]) -> Self {
        let w = 1.0 / points.len() as f64;
        EmpiricalMeasure {
            atoms: points.iter().map(|&x| (x, w)).collect(),
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * x.powi(k as i32)).sum()
    }
}

/// Cauchy behaviour of one moment along a sequence of measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCauchy {
    pub order: u32,
    pub values: Vec<f64>,
    /// `tail_oscillation[n] = max_{a, b >= n} |m(a) - m(b)|`.
    pub tail_oscillation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoReport {
    pub moments: Vec<MomentCauchy>,
}

/// Moment-Cauchy diagnostics for moments `1..=max_moment` as a proxy for weak
/// convergence of the measures.
pub fn szego_convergence(measures: &[EmpiricalMeasure], max_moment: u32) -> Result<SzegoReport> {
    if measures.len() < 2 {
        return Err(Error::InvalidArgument("need at least two measures".into()));
    }
    let moments = (1..=max_moment)
        .map(|order| {
            let values: Vec<f64> = measures.iter().map(|m| m.moment(order)).collect();
            let mut tail = vec![0.0; values.len()];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for n in (0..values.len()).rev() {
                lo = lo.min(values[n]);
                hi = hi.max(values[n]);
                tail[n] = hi - lo;
            }
            MomentCauchy {
                order,
                values,
                tail_oscillation: tail,
            }
        })
        .collect();
    Ok(SzegoReport { moments })
}

/// One level of a sequence of eigenspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    /// 1-based level index `N`.
    pub level: usize,
    pub dim: usize,
    pub y: f64,
    pub y_mean: f64,
    pub y_variance: f64,
    /// `(1/d) Y`, the trace-mean quantum variance.
    pub v_trace_mean: f64,
    pub v_liouville: Option<f64>,
    pub trace_mean: f64,
    /// `S_N = sum_{n <= N} (Y_n - E Y_n) / d_n`.
    pub partial_sum: f64,
    /// `(1/N) sum_{n <= N} Y_n / d_n`.
    pub cesaro_mean: f64,
}

/// Inputs for one level before the running sums are formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelInput {
    pub dim: usize,
    pub y: f64,
    pub y_mean: f64,
    pub y_variance: f64,
    pub trace_mean: f64,
    pub v_liouville: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRun {
    pub seed: u64,
    pub stream_index: u64,
    pub generator: String,
    pub levels: Vec<LevelRecord>,
    pub reciprocal_dim_sum: f64,
    /// Fraction of `sum 1/d_n` contributed by the upper half of the levels.
    pub reciprocal_tail_share: f64,
    pub borel_cantelli_regime: bool,
}

impl SequenceRun {
    pub fn from_levels(inputs: &[LevelInput], sampler: &HaarSampler) -> Self {
        let mut s = CompensatedSum::default();
        let mut c = CompensatedSum::default();
        let mut levels = Vec::with_capacity(inputs.len());
        for (idx, inp) in inputs.iter().enumerate() {
            let d = inp.dim as f64;
            s.add((inp.y - inp.y_mean) / d);
            c.add(inp.y / d);
            levels.push(LevelRecord {
                level: idx + 1,
                dim: inp.dim,
                y: inp.y,
                y_mean: inp.y_mean,
                y_variance: inp.y_variance,
                v_trace_mean: inp.y / d,
                v_liouville: inp.v_liouville,
                trace_mean: inp.trace_mean,
                partial_sum: s.value(),
                cesaro_mean: c.value() / (idx + 1) as f64,
            });
        }
        let recip: Vec<f64> = inputs.iter().map(|l| 1.0 / l.dim as f64).collect();
        let total: f64 = recip.iter().sum();
        let tail: f64 = recip[recip.len() / 2..].iter().sum();
        let share = if total > 0.0 { tail / total } else { 0.0 };
        SequenceRun {
            seed: sampler.seed(),
            stream_index: sampler.stream_index(),
            generator: GENERATOR.to_string(),
            levels,
            reciprocal_dim_sum: total,
            reciprocal_tail_share: share,
            borel_cantelli_regime: share < BOREL_CANTELLI_TAIL_SHARE,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `S_N / N` at the last level.
    pub fn final_average(&self) -> f64 {
        self.levels
            .last()
            .map_or(0.0, |l| l.partial_sum / l.level as f64)
    }

    /// `k sqrt(sum_n Var(Y_n / d_n)) / N`.
    pub fn deviation_band(&self, k: f64) -> f64 {
        let var: f64 = self
            .levels
            .iter()
            .map(|l| l.y_variance / (l.dim as f64 * l.dim as f64))
            .sum();
        k * var.sqrt() / self.len() as f64
    }

    /// Partial sums rebuilt from the per-level records.
    pub fn recomputed_partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.levels
            .iter()
            .map(|l| {
                acc += (l.y - l.y_mean) / l.dim as f64;
                acc
            })
            .collect()
    }
}

/// Draws one Haar unitary per level (child stream = level index) and records
/// `Y_n`, its exact mean and variance, and the running sums.
pub fn slln_run(spectra: &[SpectrumVector], sampler: &HaarSampler) -> Result<SequenceRun> {
    if spectra.is_empty() {
        return Err(Error::InvalidArgument("empty level sequence".into()));
    }
    let mut inputs = Vec::with_capacity(spectra.len());
    for (n, s) in spectra.iter().enumerate() {
        let d = s.dim();
        if d < 2 {
            return Err(Error::InvalidArgument(format!("level {} has d = {d} < 2", n + 1)));
        }
        let u = sampler.with_dim(d).child(n as u64).sample_unitary();
        let x = moment_map_diagonal(&u, s)?;
        inputs.push(LevelInput {
            dim: d,
            y: x.iter().map(|v| v * v).sum(),
            y_mean: moment2_exact(s),
            y_variance: variance_y(s),
            trace_mean: s.trace_mean(),
            v_liouville: None,
        });
    }
    Ok(SequenceRun::from_levels(&inputs, sampler))
}
