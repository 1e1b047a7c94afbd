//! Haar-distributed unitaries and Monte-Carlo estimators built on them.
//!
//! Samples come from a complex Ginibre matrix factored by Householder QR.
//! The reflectors map each column onto `-phase(x_0) |x| e_0`, so the raw `Q`
//! carries a data-dependent phase in every column; multiplying column `j` by
//! `r_jj / |r_jj|` removes it and leaves an exactly Haar-distributed unitary.
//!
//! Randomness is ChaCha20 keyed by `seed` with `stream_index` selecting the
//! ChaCha stream. Estimators split work into fixed-size chunks, each drawn
//! from its own child stream, so results do not depend on how chunks are
//! scheduled.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::orbit::{moment_map_diagonal_unchecked, SpectrumVector};
use crate::stats::{Accumulator, ComplexAccumulator, ComplexMcEstimate, McEstimate};

/// Name of the pinned generator, echoed into reports.
pub const GENERATOR: &str = "rand_chacha::ChaCha20Rng(seed_from_u64(seed), stream=stream_index)";

/// Samples per child stream in the estimators.
pub const CHUNK: u64 = 1024;

/// Minimum sample count accepted by the estimators.
pub const MIN_SAMPLES: u64 = 100;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct HaarSampler {
    seed: u64,
    stream_index: u64,
    d: usize,
    rng: ChaCha20Rng,
}

impl HaarSampler {
    pub fn new(seed: u64, stream_index: u64, d: usize) -> Self {
        assert!(d >= 1, "Haar sampler needs d >= 1");
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        HaarSampler {
            seed,
            stream_index,
            d,
            rng,
        }
    }

    /// Independent sampler on a derived stream. Children of equal parents with
    /// equal keys are identical.
    pub fn child(&self, key: u64) -> HaarSampler {
        let stream = splitmix64(self.stream_index ^ splitmix64(key.wrapping_add(1)));
        HaarSampler::new(self.seed, stream, self.d)
    }

    /// Same seed and stream, different dimension.
    pub fn with_dim(&self, d: usize) -> HaarSampler {
        HaarSampler::new(self.seed, self.stream_index, d)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn ginibre(&mut self) -> Vec<Complex64> {
        let n = self.d * self.d;
        let mut g = Vec::with_capacity(n);
        for _ in 0..n {
            let re: f64 = StandardNormal.sample(&mut self.rng);
            let im: f64 = StandardNormal.sample(&mut self.rng);
            g.push(Complex64::new(re, im));
        }
        g
    }

    /// Draws one Haar unitary.
    pub fn sample_unitary(&mut self) -> CMatrix {
        let g = self.ginibre();
        let (mut q, r_diag) = householder_qr(self.d, g);
        for (j, r) in r_diag.iter().enumerate() {
            let m = r.norm();
            if m > 0.0 {
                let phase = r / m;
                for z in q[j * self.d..(j + 1) * self.d].iter_mut() {
                    *z *= phase;
                }
            }
        }
        CMatrix::from_vec(self.d, self.d, q)
    }

    /// Ginibre QR without the phase correction. Not Haar; kept so tests can
    /// show the correction matters.
    #[doc(hidden)]
    pub fn sample_uncorrected_q(&mut self) -> CMatrix {
        let g = self.ginibre();
        let (q, _) = householder_qr(self.d, g);
        CMatrix::from_vec(self.d, self.d, q)
    }
}

/// Householder QR of a column-major `d x d` matrix. Returns `Q` (column-major)
/// and the diagonal of `R`.
fn householder_qr(d: usize, mut a: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut vs: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    let mut r_diag = Vec::with_capacity(d);
    for k in 0..d {
        let col = &a[k * d + k..(k + 1) * d];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            vs.push(Vec::new());
            r_diag.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let x0 = col[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let beta = -phase * norm;
        let mut v: Vec<Complex64> = col.to_vec();
        v[0] -= beta;
        let vnorm = (2.0 * norm * (norm + x0.norm())).sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        for j in k + 1..d {
            let cj = &mut a[j * d + k..(j + 1) * d];
            let w: Complex64 = v.iter().zip(cj.iter()).map(|(vi, ai)| vi.conj() * ai).sum();
            let w2 = w * 2.0;
            for (ai, vi) in cj.iter_mut().zip(&v) {
                *ai -= vi * w2;
            }
        }
        vs.push(v);
        r_diag.push(beta);
    }

    let mut q = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        q[i * d + i] = Complex64::new(1.0, 0.0);
    }
    for k in (0..d).rev() {
        let v = &vs[k];
        if v.is_empty() {
            continue;
        }
        for j in k..d {
            let cj = &mut q[j * d + k..(j + 1) * d];
            let w: Complex64 = v.iter().zip(cj.iter()).map(|(vi, qi)| vi.conj() * qi).sum();
            let w2 = w * 2.0;
            for (qi, vi) in cj.iter_mut().zip(v) {
                *qi -= vi * w2;
            }
        }
    }
    (q, r_diag)
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "samples = {samples}, need at least {MIN_SAMPLES}"
        )));
    }
    Ok(())
}

/// Runs `body` over `samples` Haar draws, chunked across child streams, and
/// merges the per-chunk accumulators in chunk order.
fn for_each_unitary<A, F>(sampler: &HaarSampler, samples: u64, init: A, mut body: F) -> A
where
    A: Clone + Merge,
    F: FnMut(&CMatrix, &mut A),
{
    let mut total = init.clone();
    let chunks = samples.div_ceil(CHUNK);
    for c in 0..chunks {
        let take = CHUNK.min(samples - c * CHUNK);
        let mut child = sampler.child(c);
        let mut acc = init.clone();
        for _ in 0..take {
            let u = child.sample_unitary();
            body(&u, &mut acc);
        }
        total.merge_from(&acc);
    }
    total
}

trait Merge {
    fn merge_from(&mut self, other: &Self);
}

impl Merge for Accumulator {
    fn merge_from(&mut self, other: &Self) {
        self.merge(other)
    }
}

impl Merge for ComplexAccumulator {
    fn merge_from(&mut self, other: &Self) {
        self.merge(other)
    }
}

impl<T: Merge> Merge for Vec<T> {
    fn merge_from(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.merge_from(b);
        }
    }
}

/// Second and fourth orbit moments for one spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitMomentEstimates {
    pub m2: McEstimate,
    pub m4: McEstimate,
}

/// Estimates `E|J(U D U*)|^2` and `E|J(U D U*)|^4` for several spectra of the
/// same dimension, reusing each Haar draw across all of them.
pub fn mc_orbit_moments(
    spectra: &[SpectrumVector],
    samples: u64,
    sampler: &HaarSampler,
) -> Result<Vec<OrbitMomentEstimates>> {
    check_samples(samples)?;
    for s in spectra {
        if s.dim() != sampler.dim() {
            return Err(Error::DimensionMismatch {
                expected: sampler.dim(),
                got: s.dim(),
            });
        }
    }
    let init = vec![Accumulator::default(); 2 * spectra.len()];
    let acc = for_each_unitary(sampler, samples, init, |u, acc| {
        for (idx, s) in spectra.iter().enumerate() {
            let x = moment_map_diagonal_unchecked(u, s.centered());
            let y: f64 = x.iter().map(|v| v * v).sum();
            acc[2 * idx].push(y);
            acc[2 * idx + 1].push(y * y);
        }
    });
    Ok(acc
        .chunks(2)
        .map(|pair| OrbitMomentEstimates {
            m2: pair[0].estimate(),
            m4: pair[1].estimate(),
        })
        .collect())
}

/// Monte-Carlo estimate of `E|J(U D_0 U*)|^k` for `k` in `{2, 4}`.
pub fn mc_moment(
    s: &SpectrumVector,
    k: u32,
    samples: u64,
    sampler: &HaarSampler,
) -> Result<McEstimate> {
    let est = mc_orbit_moments(std::slice::from_ref(s), samples, sampler)?[0];
    match k {
        2 => Ok(est.m2),
        4 => Ok(est.m4),
        _ => Err(Error::InvalidArgument(format!("moment order {k} not in {{2, 4}}"))),
    }
}

/// Monte-Carlo estimate of `E exp(i <X, J(U D_0 U*)>)`.
pub fn mc_characteristic(
    s: &SpectrumVector,
    x: &[f64],
    samples: u64,
    sampler: &HaarSampler,
) -> Result<ComplexMcEstimate> {
    check_samples(samples)?;
    if x.len() != s.dim() || sampler.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: if x.len() != s.dim() { x.len() } else { sampler.dim() },
        });
    }
    let acc = for_each_unitary(sampler, samples, ComplexAccumulator::default(), |u, acc| {
        let diag = moment_map_diagonal_unchecked(u, s.centered());
        let phase: f64 = x.iter().zip(&diag).map(|(a, b)| a * b).sum();
        acc.push(Complex64::from_polar(1.0, phase));
    });
    Ok(acc.estimate())
}

/// Monte-Carlo estimate of `E prod_a |U_{i_a j_a}|^2`.
pub fn mc_entry_moment(
    entries: &[(usize, usize)],
    samples: u64,
    sampler: &HaarSampler,
) -> Result<McEstimate> {
    check_samples(samples)?;
    let d = sampler.dim();
    if let Some(&(i, j)) = entries.iter().find(|&&(i, j)| i >= d || j >= d) {
        return Err(Error::InvalidArgument(format!(
            "entry ({i}, {j}) out of range for d = {d}"
        )));
    }
    let acc = for_each_unitary(sampler, samples, Accumulator::default(), |u, acc| {
        let v: f64 = entries.iter().map(|&(i, j)| u[(i, j)].norm_sqr()).product();
        acc.push(v);
    });
    Ok(acc.estimate())
}

/// Monte-Carlo estimate of `E |U_{i1 j1}|^2 |U_{i2 j2}|^2`, the degree-2
/// entry moment compared against the Weingarten value.
pub fn mc_weingarten_spotcheck(
    i1: usize,
    j1: usize,
    i2: usize,
    j2: usize,
    samples: u64,
    sampler: &HaarSampler,
) -> Result<McEstimate> {
    mc_entry_moment(&[(i1, j1), (i2, j2)], samples, sampler)
}
