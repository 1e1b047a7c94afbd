//! Symmetric polynomials evaluated at real points.
//!
//! Elementary, complete homogeneous and power-sum polynomials are computed by
//! the usual one-variable-at-a-time recurrences. Schur polynomials go through
//! the Jacobi-Trudi determinant `det(h_{mu_i + j - i})`, which stays tiny for
//! the partitions used here (at most four rows).

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer partition with weakly decreasing parts; trailing zeros are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "partition parts must be weakly decreasing: {parts:?}"
            )));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// The one-row partition `(k)`.
    pub fn row(k: usize) -> Self {
        if k == 0 {
            Self::empty()
        } else {
            Partition(vec![k])
        }
    }

    /// The one-column partition `(1^k)`.
    pub fn column(k: usize) -> Self {
        Partition(vec![1; k])
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// `|mu|`, the number of boxes.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    /// `l(mu)`, the number of nonzero rows.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conjugate(&self) -> Partition {
        let cols = self.0.first().copied().unwrap_or(0);
        let parts = (0..cols)
            .map(|j| self.0.iter().take_while(|&&p| p > j).count())
            .collect();
        Partition(parts)
    }

    /// Contents `j - i` of every box `(i, j)`, row by row.
    pub fn contents(&self) -> impl Iterator<Item = i64> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (0..len).map(move |j| j as i64 - i as i64))
    }

    /// Hook lengths of every box, row by row.
    pub fn hooks(&self) -> Vec<usize> {
        let conj = self.conjugate();
        let mut out = Vec::with_capacity(self.weight());
        for (i, &len) in self.0.iter().enumerate() {
            for j in 0..len {
                let arm = len - j - 1;
                let leg = conj.0[j] - i - 1;
                out.push(arm + leg + 1);
            }
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `weight` with at most `max_length` rows, in
/// reverse-lexicographic order (`(4), (3,1), (2,2), (2,1,1), (1,1,1,1)`).
pub fn partitions_of(weight: usize, max_length: usize) -> Vec<Partition> {
    fn go(rest: usize, cap: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        if slots == 0 {
            return;
        }
        for first in (1..=cap.min(rest)).rev() {
            cur.push(first);
            go(rest - first, first, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(weight, weight, max_length, &mut Vec::new(), &mut out);
    out
}

/// `e_0, ..., e_k` at `x`.
pub fn elementary_all(k: usize, x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (n, &xi) in x.iter().enumerate() {
        for j in (1..=k.min(n + 1)).rev() {
            e[j] += xi * e[j - 1];
        }
    }
    e
}

/// `e_k(x)`; zero when `k > x.len()`.
pub fn elementary(k: usize, x: &[f64]) -> f64 {
    if k > x.len() {
        return 0.0;
    }
    elementary_all(k, x)[k]
}

/// `h_0, ..., h_k` at `x`.
pub fn complete_all(k: usize, x: &[f64]) -> Vec<f64> {
    let mut h = vec![0.0; k + 1];
    h[0] = 1.0;
    for &xi in x {
        for j in 1..=k {
            h[j] += xi * h[j - 1];
        }
    }
    h
}

pub fn complete(k: usize, x: &[f64]) -> f64 {
    complete_all(k, x)[k]
}

pub fn power_sum(k: u32, x: &[f64]) -> f64 {
    x.iter().map(|v| v.powi(k as i32)).sum()
}

/// Schur polynomial `S_mu(x)` via the Jacobi-Trudi determinant. Vanishes
/// exactly when `mu` has more rows than `x` has variables.
pub fn schur(mu: &Partition, x: &[f64]) -> f64 {
    let rows = mu.length();
    if rows == 0 {
        return 1.0;
    }
    if rows > x.len() {
        return 0.0;
    }
    let top = mu.parts()[0] + rows - 1;
    let h = complete_all(top, x);
    if rows == 1 {
        return h[mu.parts()[0]];
    }
    let m = DMatrix::from_fn(rows, rows, |i, j| {
        let idx = mu.parts()[i] as i64 + j as i64 - i as i64;
        if idx < 0 {
            0.0
        } else {
            h[idx as usize]
        }
    });
    m.determinant()
}

/// Newton's identities: `e_1..e_k` from `p_1..p_k`, using
/// `k e_k = sum_{i=1}^k (-1)^{i-1} e_{k-i} p_i`.
pub fn newton_e_from_p(p: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(p.len() + 1);
    e.push(1.0);
    for k in 1..=p.len() {
        let mut acc = 0.0;
        for i in 1..=k {
            let term = e[k - i] * p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / k as f64);
    }
    e.split_off(1)
}

/// Value at the origin of `Delta S_mu` (`|mu| = 2`) or `Delta^2 S_mu`
/// (`|mu| = 4`) in `d` variables.
///
/// A degree-4 monomial survives `Delta^2` only as `x_a^4` (giving 24) or
/// `x_a^2 x_b^2` (giving 8), so the value is read off the monomial
/// coefficients of `S_mu`.
pub fn laplacian_at_zero(mu: &Partition, d: usize) -> Result<i64> {
    let d = d as i64;
    let value = match mu.parts() {
        [1, 1] => 0,
        [2] => 2 * d,
        [1, 1, 1, 1] => 0,
        [2, 1, 1] => 0,
        [2, 2] => 4 * d * (d - 1),
        [3, 1] => 4 * d * (d - 1),
        [4] => 24 * d + 4 * d * (d - 1),
        _ => return Err(Error::DegreeNotTabulated(mu.weight())),
    };
    Ok(value)
}
