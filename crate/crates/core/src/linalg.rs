//! Dense complex matrix helpers shared by the sampler and the observables.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// `max |U*U - I|` over all entries.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// `max |T - T*|` over all entries.
pub fn hermitian_defect(t: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..t.ncols() {
        for i in 0..=j.min(t.nrows().saturating_sub(1)) {
            worst = worst.max((t[(i, j)] - t[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_abs(t: &CMatrix) -> f64 {
    t.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let d = perm.len();
    let mut p = CMatrix::zeros(d, d);
    for (i, &j) in perm.iter().enumerate() {
        p[(i, j)] = Complex64::new(1.0, 0.0);
    }
    p
}
