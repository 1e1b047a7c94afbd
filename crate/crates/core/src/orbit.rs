//! Moments of inertia of the permutohedron `P_lambda` under the pushforward of
//! the orbit measure by diagonal extraction.
//!
//! For a Haar unitary `U` and centered spectrum `Lambda` the diagonal
//! `x_i = sum_j Lambda_j |U_ij|^2` lies in the permutohedron of `Lambda`.
//! With `p_k = p_k(Lambda)`:
//!
//! ```text
//! m2 = E|x|^2 = p2 / (d + 1)
//! m4 = E|x|^4 = p2^2 / (d (d + 1)) + (p2^2 + 2 p4) / ((d + 1)(d + 2)(d + 3))
//! ```
//!
//! `m4` is obtained from the degree-4 part of the Schur expansion of the
//! orbital Fourier transform; [`moment4_from_schur_expansion`] evaluates that
//! sum term by term and the `weingarten` module recomputes it from entry
//! moments. The two candidate `beta_4` coefficients of `p2^2` are exposed by
//! [`beta4_statement`] and [`beta4_resolved`] for comparison; neither is an
//! exact moment since `m4` depends on `p4` as well.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::haar::{mc_orbit_moments, HaarSampler, GENERATOR};
use crate::linalg::{unitarity_defect, CMatrix};
use crate::qe::EmpiricalMeasure;
use crate::report::Claim;
use crate::sympoly::{laplacian_at_zero, partitions_of, power_sum, schur, Partition};
use crate::weingarten::{exact_m2, exact_m4, MAX_DEGREE};

/// Unitarity tolerance for [`moment_map_diagonal`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Eigenvalues `lambda` together with the centered copy
/// `Lambda = lambda - mean(lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVector {
    lambda: Vec<f64>,
    centered: Vec<f64>,
    trace_mean: f64,
}

impl SpectrumVector {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `Lambda`, summing to zero.
    pub fn centered(&self) -> &[f64] {
        &self.centered
    }

    /// `(1/d) Tr`.
    pub fn trace_mean(&self) -> f64 {
        self.trace_mean
    }

    /// `p_k(Lambda)`.
    pub fn p(&self, k: u32) -> f64 {
        power_sum(k, &self.centered)
    }

    pub fn scaled(&self, c: f64) -> SpectrumVector {
        let v: Vec<f64> = self.lambda.iter().map(|x| c * x).collect();
        center_spectrum(&v).expect("scaling keeps entries finite")
    }
}

pub fn center_spectrum(lambda: &[f64]) -> Result<SpectrumVector> {
    if lambda.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
    }
    let trace_mean = lambda.iter().sum::<f64>() / lambda.len() as f64;
    let centered = lambda.iter().map(|x| x - trace_mean).collect();
    Ok(SpectrumVector {
        lambda: lambda.to_vec(),
        centered,
        trace_mean,
    })
}

/// `x_i = sum_j Lambda_j |U_ij|^2`, the diagonal of `U D(Lambda) U*`.
pub fn moment_map_diagonal(u: &CMatrix, s: &SpectrumVector) -> Result<Vec<f64>> {
    if u.nrows() != s.dim() || u.ncols() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: u.nrows(),
        });
    }
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(moment_map_diagonal_unchecked(u, s.centered()))
}

/// [`moment_map_diagonal`] without the unitarity and shape checks.
pub fn moment_map_diagonal_unchecked(u: &CMatrix, weights: &[f64]) -> Vec<f64> {
    let d = weights.len();
    let mut out = vec![0.0; d];
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, z) in out.iter_mut().zip(u.column(j).iter()) {
            *o += w * z.norm_sqr();
        }
    }
    out
}

pub fn permutohedron_center_of_mass(lambda: &[f64]) -> Vec<f64> {
    if lambda.is_empty() {
        return Vec::new();
    }
    let a = lambda.iter().sum::<f64>() / lambda.len() as f64;
    vec![a; lambda.len()]
}

/// `E|x|^2 = p2(Lambda) / (d + 1)`.
pub fn moment2_exact(s: &SpectrumVector) -> f64 {
    s.p(2) / (s.dim() as f64 + 1.0)
}

/// `E|x|^4 = p2^2 / (d(d+1)) + (p2^2 + 2 p4) / ((d+1)(d+2)(d+3))`. Valid for
/// every `d >= 1`.
pub fn moment4_exact(s: &SpectrumVector) -> f64 {
    let d = s.dim() as f64;
    let p2 = s.p(2);
    let p4 = s.p(4);
    p2 * p2 / (d * (d + 1.0)) + (p2 * p2 + 2.0 * p4) / ((d + 1.0) * (d + 2.0) * (d + 3.0))
}

/// `Var |x|^2 = m4 - m2^2`.
pub fn variance_y(s: &SpectrumVector) -> f64 {
    let m2 = moment2_exact(s);
    (moment4_exact(s) - m2 * m2).max(0.0)
}

/// `prod_cells (d + c(cell))`, which equals `prod_i (mu_i + d - i)! / (d - i)!`.
fn content_product(mu: &Partition, d: usize) -> f64 {
    mu.contents().map(|c| d as f64 + c as f64).product()
}

/// `E|x|^4` as `sum_{|mu| = 4} (Delta^2 S_mu)(0) S_mu(Lambda) / prod(d + c)`.
pub fn moment4_from_schur_expansion(s: &SpectrumVector) -> f64 {
    let d = s.dim();
    partitions_of(4, d)
        .iter()
        .map(|mu| {
            let lap = laplacian_at_zero(mu, d).expect("degree 4 is tabulated") as f64;
            lap * schur(mu, s.centered()) / content_product(mu, d)
        })
        .sum()
}

/// `E|x|^2` from the degree-2 part of the same expansion.
pub fn moment2_from_schur_expansion(s: &SpectrumVector) -> f64 {
    let d = s.dim();
    partitions_of(2, d)
        .iter()
        .map(|mu| {
            let lap = laplacian_at_zero(mu, d).expect("degree 2 is tabulated") as f64;
            lap * schur(mu, s.centered()) / content_product(mu, d)
        })
        .sum()
}

/// Candidate coefficient
/// `4d(d-1)/((d+1)d^2(d-1)) - 4d(d-1)/((d+2)(d+1)d(d-2)) + (12d^2 + 4d(d-1))/((d+3)(d+2)(d+1)d)`.
pub fn beta4_statement(d: usize) -> Result<f64> {
    if d <= 2 {
        return Err(Error::ClosedFormSingular(d));
    }
    let d = d as f64;
    Ok(4.0 * d * (d - 1.0) / ((d + 1.0) * d * d * (d - 1.0))
        - 4.0 * d * (d - 1.0) / ((d + 2.0) * (d + 1.0) * d * (d - 2.0))
        + (12.0 * d * d + 4.0 * d * (d - 1.0)) / ((d + 3.0) * (d + 2.0) * (d + 1.0) * d))
}

/// Candidate coefficient
/// `d(d-1)/((d+1)d^2(d-1)) + (3d^2 + d(d-1))/((d+3)(d+2)(d+1)d) - d(d-1)/((d+2)(d+1)d(d-2))`.
pub fn beta4_resolved(d: usize) -> Result<f64> {
    if d <= 2 {
        return Err(Error::ClosedFormSingular(d));
    }
    let d = d as f64;
    Ok(d * (d - 1.0) / ((d + 1.0) * d * d * (d - 1.0))
        + (3.0 * d * d + d * (d - 1.0)) / ((d + 3.0) * (d + 2.0) * (d + 1.0) * d)
        - d * (d - 1.0) / ((d + 2.0) * (d + 1.0) * d * (d - 2.0)))
}

/// Both candidate coefficients at one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta4Comparison {
    pub d: usize,
    pub statement: f64,
    pub resolved: f64,
    pub ratio: f64,
}

pub fn beta4_compare(d: usize) -> Result<Beta4Comparison> {
    let statement = beta4_statement(d)?;
    let resolved = beta4_resolved(d)?;
    Ok(Beta4Comparison {
        d,
        statement,
        resolved,
        ratio: statement / resolved,
    })
}

/// Partial sum of the Schur expansion of the orbital Fourier transform
/// `E exp(i <X, x>)` over partitions with `|mu| <= max_degree` and at most
/// `d` rows. Factorial prefactors are evaluated with `ln_gamma`.
pub fn orbital_fourier_truncated(
    s: &SpectrumVector,
    x: &[f64],
    max_degree: usize,
) -> Result<Complex64> {
    let d = s.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if max_degree > 4 {
        return Err(Error::DegreeNotSupported(max_degree));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for n in 0..=max_degree {
        let i_pow = Complex64::i().powu(n as u32);
        for mu in partitions_of(n, d) {
            let ln_pref: f64 = mu
                .parts()
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let base = (d - i - 1) as f64;
                    ln_gamma(base + 1.0) - ln_gamma(base + m as f64 + 1.0)
                })
                .sum();
            let term = schur(&mu, x) * schur(&mu, s.centered()) * ln_pref.exp();
            total += i_pow * term;
        }
    }
    Ok(total)
}

/// Uniform probability measure on the raw eigenvalues.
pub fn empirical_measure(s: &SpectrumVector) -> EmpiricalMeasure {
    EmpiricalMeasure::uniform(s.lambda())
}

/// Closed-form, Weingarten and Monte-Carlo values of the orbit moments at one
/// spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub d: usize,
    pub lambda: Vec<f64>,
    pub m2_exact: Claim,
    pub m4_exact: Claim,
    pub variance_exact: Claim,
    pub m2_weingarten: Option<Claim>,
    pub m4_weingarten: Option<Claim>,
    pub m2_mc: Claim,
    pub m4_mc: Claim,
    pub sample_count: u64,
    pub seed: u64,
    pub stream_index: u64,
    pub generator: String,
    pub discrepancies: Discrepancies,
}

/// Closed form against each oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancies {
    /// `|mc - exact| / stderr`.
    pub m2_mc_sigmas: f64,
    pub m4_mc_sigmas: f64,
    /// `|weingarten - exact| / |weingarten|`.
    pub m2_weingarten_rel: Option<f64>,
    pub m4_weingarten_rel: Option<f64>,
}

fn rel_err(value: f64, oracle: f64) -> f64 {
    if value == oracle {
        0.0
    } else {
        (value - oracle).abs() / oracle.abs()
    }
}

impl MomentReport {
    /// Evaluates every source. The Weingarten oracle runs only for
    /// `d <= weingarten_max_d`, since `exact_m4` costs `O(d^4)`.
    pub fn build(
        s: &SpectrumVector,
        samples: u64,
        sampler: &HaarSampler,
        weingarten_max_d: usize,
    ) -> Result<Self> {
        let d = s.dim();
        let m2 = moment2_exact(s);
        let m4 = moment4_exact(s);
        let est = mc_orbit_moments(std::slice::from_ref(s), samples, &sampler.with_dim(d))?[0];
        let use_wg = d <= weingarten_max_d;
        let m2_wg = if use_wg && d >= 2 { Some(exact_m2(s)?) } else { None };
        let m4_wg = if use_wg && d >= MAX_DEGREE { Some(exact_m4(s)?) } else { None };
        Ok(MomentReport {
            d,
            lambda: s.lambda().to_vec(),
            m2_exact: Claim::closed_form(m2),
            m4_exact: Claim::closed_form(m4),
            variance_exact: Claim::closed_form(variance_y(s)),
            m2_weingarten: m2_wg.map(Claim::weingarten),
            m4_weingarten: m4_wg.map(Claim::weingarten),
            m2_mc: Claim::monte_carlo(est.m2),
            m4_mc: Claim::monte_carlo(est.m4),
            sample_count: samples,
            seed: sampler.seed(),
            stream_index: sampler.stream_index(),
            generator: GENERATOR.to_string(),
            discrepancies: Discrepancies {
                m2_mc_sigmas: est.m2.sigmas_from(m2),
                m4_mc_sigmas: est.m4.sigmas_from(m4),
                m2_weingarten_rel: m2_wg.map(|w| rel_err(m2, w)),
                m4_weingarten_rel: m4_wg.map(|w| rel_err(m4, w)),
            },
        })
    }
}
