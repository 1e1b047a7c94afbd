//! Independent oracles: exact integer multivariate polynomials and brute-force
//! symmetric functions.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Integer polynomial in `nvars` variables, keyed by exponent vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, i64>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: i64) -> Self {
        let mut p = MPoly::zero(nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: i64) {
        let entry = self.terms.entry(e).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add(&self, other: &MPoly, scale: i64) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), scale * c);
        }
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Sum of second partial derivatives.
    pub fn laplacian(&self) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            for i in 0..self.nvars {
                if e[i] >= 2 {
                    let mut f = e.clone();
                    f[i] -= 2;
                    out.add_term(f, c * (e[i] as i64) * (e[i] as i64 - 1));
                }
            }
        }
        out
    }

    pub fn at_zero(&self) -> i64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c as f64 * x.iter().zip(e).map(|(v, &p)| v.powi(p as i32)).product::<f64>())
            .sum()
    }
}

fn exponent_vectors(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=degree {
        for mut rest in exponent_vectors(nvars - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `h_k` as the sum of every monomial of degree `k`.
pub fn complete_poly(nvars: usize, k: i64) -> MPoly {
    if k < 0 {
        return MPoly::zero(nvars);
    }
    let mut p = MPoly::zero(nvars);
    for e in exponent_vectors(nvars, k as u32) {
        p.add_term(e, 1);
    }
    p
}

/// Cofactor expansion along the first row.
pub fn det_poly(m: &[Vec<MPoly>], nvars: usize) -> MPoly {
    let n = m.len();
    if n == 0 {
        return MPoly::constant(nvars, 1);
    }
    let mut out = MPoly::zero(nvars);
    for col in 0..n {
        let minor: Vec<Vec<MPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, p)| p.clone()).collect())
            .collect();
        let sign = if col % 2 == 0 { 1 } else { -1 };
        out = out.add(&m[0][col].mul(&det_poly(&minor, nvars)), sign);
    }
    out
}

/// `S_mu = det(h_{mu_i + j - i})` as an explicit polynomial.
pub fn schur_poly(mu: &[usize], nvars: usize) -> MPoly {
    let l = mu.len();
    let m: Vec<Vec<MPoly>> = (0..l)
        .map(|i| (0..l).map(|j| complete_poly(nvars, mu[i] as i64 + j as i64 - i as i64)).collect())
        .collect();
    det_poly(&m, nvars)
}

/// `e_k` by summing over all index subsets.
pub fn elementary_brute(k: usize, x: &[f64]) -> f64 {
    let n = x.len();
    if k > n {
        return 0.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            total += (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).product::<f64>();
        }
    }
    total
}

/// Schur polynomial as the bialternant `det(x_i^{mu_j + n - j}) / det(x_i^{n - j})`.
pub fn schur_bialternant(mu: &[usize], x: &[f64]) -> f64 {
    let n = x.len();
    let det = |f: &dyn Fn(usize, usize) -> f64| {
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| f(i, j));
        m.determinant()
    };
    let part = |j: usize| mu.get(j).copied().unwrap_or(0);
    let num = det(&|i, j| x[i].powi((part(j) + n - 1 - j) as i32));
    let den = det(&|i, j| x[i].powi((n - 1 - j) as i32));
    num / den
}
