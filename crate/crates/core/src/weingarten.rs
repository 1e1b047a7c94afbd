//! Exact unitary Weingarten calculus for degrees `k <= 4`.
//!
//! `Wg(sigma, d) = (1/k!^2) sum_{lambda |- k} chi_lambda(1)^2 chi_lambda(sigma) / s_lambda(1^d)`
//! with `s_lambda(1^d) = prod_cells (d + c) / prod_cells h`. Each class is
//! stored as a rational function of `d` over the least common multiple of the
//! content products, and evaluated in exact `i128` rational arithmetic.
//!
//! Haar moments of matrix entries follow from
//! `E prod_a U_{i_a j_a} conj(U_{i'_a j'_a}) = sum_{sigma, tau} [i = i' o sigma] [j = j' o tau] Wg(sigma tau^-1, d)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::orbit::SpectrumVector;
use crate::sympoly::{partitions_of, Partition};

pub type Rational = Ratio<i128>;

pub const MAX_DEGREE: usize = 4;

/// Character table of `S_k`. Rows are irreducibles and columns conjugacy
/// classes, both listed as partitions in reverse-lexicographic order.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub k: usize,
    pub partitions: Vec<Partition>,
    pub class_sizes: Vec<i64>,
    pub values: Vec<Vec<i64>>,
}

const S2: [[i64; 2]; 2] = [[1, 1], [-1, 1]];
const S3: [[i64; 3]; 3] = [[1, 1, 1], [-1, 0, 2], [1, -1, 1]];
const S4: [[i64; 5]; 5] = [
    [1, 1, 1, 1, 1],
    [-1, 0, -1, 1, 3],
    [0, -1, 2, 0, 2],
    [1, 0, -1, -1, 3],
    [-1, 1, 1, -1, 1],
];

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// `k! / z_mu`, the number of permutations with cycle type `mu`.
fn class_size(mu: &Partition) -> i64 {
    let k = mu.weight();
    let mut z = 1i64;
    let mut counts = BTreeMap::new();
    for &p in mu.parts() {
        *counts.entry(p).or_insert(0usize) += 1;
    }
    for (part, mult) in counts {
        z *= (part as i64).pow(mult as u32) * factorial(mult);
    }
    factorial(k) / z
}

impl CharacterTable {
    pub fn new(k: usize) -> Result<Self> {
        let values: Vec<Vec<i64>> = match k {
            0 | 1 => vec![vec![1]],
            2 => S2.iter().map(|r| r.to_vec()).collect(),
            3 => S3.iter().map(|r| r.to_vec()).collect(),
            4 => S4.iter().map(|r| r.to_vec()).collect(),
            _ => return Err(Error::DegreeNotSupported(k)),
        };
        let partitions = partitions_of(k, k.max(1));
        let class_sizes = partitions.iter().map(class_size).collect();
        Ok(CharacterTable {
            k,
            partitions,
            class_sizes,
            values,
        })
    }

    /// Column of the class with cycle type `mu`.
    pub fn class_index(&self, mu: &Partition) -> Option<usize> {
        self.partitions.iter().position(|p| p == mu)
    }

    /// `chi_lambda(1)`, the column of the identity class `(1^k)`.
    pub fn dimension(&self, irrep: usize) -> i64 {
        *self.values[irrep].last().expect("nonempty table")
    }

    /// Row orthogonality `sum_sigma chi_a(sigma) chi_b(sigma) = k! delta_ab`,
    /// and `chi(1)` matching the hook length formula.
    pub fn verify(&self) -> Result<()> {
        let order = factorial(self.k);
        let n = self.partitions.len();
        for a in 0..n {
            for b in 0..n {
                let s: i64 = (0..n)
                    .map(|c| self.class_sizes[c] * self.values[a][c] * self.values[b][c])
                    .sum();
                let want = if a == b { order } else { 0 };
                if s != want {
                    return Err(Error::InvalidArgument(format!(
                        "S_{} character table fails orthogonality at ({a}, {b}): {s}",
                        self.k
                    )));
                }
            }
            let hooks: i64 = self.partitions[a].hooks().iter().map(|&h| h as i64).product();
            if self.dimension(a) != order / hooks {
                return Err(Error::InvalidArgument(format!(
                    "S_{} dimension of {} disagrees with hook formula",
                    self.k, self.partitions[a]
                )));
            }
        }
        Ok(())
    }
}

/// Polynomial in `d` with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    fn one() -> Self {
        Poly(vec![Rational::from_integer(1)])
    }

    /// Multiplies by `(d + c)`.
    fn times_linear(&self, c: i64) -> Self {
        let mut out = vec![Rational::zero(); self.0.len() + 1];
        for (i, a) in self.0.iter().enumerate() {
            out[i] += a * Rational::from_integer(c as i128);
            out[i + 1] += a;
        }
        Poly(out)
    }

    fn scale(&self, a: Rational) -> Self {
        Poly(self.0.iter().map(|c| c * a).collect())
    }

    fn add(&self, other: &Poly) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![Rational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Poly(out)
    }

    pub fn eval(&self, d: i128) -> Rational {
        let x = Rational::from_integer(d);
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }
}

/// `Wg(mu, d)` as `numerator(d) / denominator(d)` for every cycle type `mu`
/// of `S_k`.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    pub k: usize,
    pub values: BTreeMap<Partition, (Poly, Poly)>,
}

impl WeingartenTable {
    pub fn build(k: usize) -> Result<Self> {
        let table = CharacterTable::new(k)?;
        table.verify()?;
        let kfact2 = Rational::from_integer((factorial(k) * factorial(k)) as i128);

        // Least common multiple of the content products, as content multiplicities.
        let mut lcm: BTreeMap<i64, usize> = BTreeMap::new();
        let content_counts: Vec<BTreeMap<i64, usize>> = table
            .partitions
            .iter()
            .map(|lam| {
                let mut m = BTreeMap::new();
                for c in lam.contents() {
                    *m.entry(c).or_insert(0) += 1;
                }
                m
            })
            .collect();
        for m in &content_counts {
            for (&c, &n) in m {
                let e = lcm.entry(c).or_insert(0);
                *e = (*e).max(n);
            }
        }
        let mut denominator = Poly::one();
        for (&c, &n) in &lcm {
            for _ in 0..n {
                denominator = denominator.times_linear(c);
            }
        }

        let mut values = BTreeMap::new();
        for (class_idx, mu) in table.partitions.iter().enumerate() {
            let mut numerator = Poly(vec![Rational::zero()]);
            for (irrep, lam) in table.partitions.iter().enumerate() {
                let dim = table.dimension(irrep) as i128;
                let chi = table.values[irrep][class_idx] as i128;
                let hooks: i128 = lam.hooks().iter().map(|&h| h as i128).product();
                let coeff = Rational::from_integer(dim * dim * chi * hooks) / kfact2;
                // lcm / prod(d + c) for this irrep.
                let mut cofactor = Poly::one();
                for (&c, &n) in &lcm {
                    let have = content_counts[irrep].get(&c).copied().unwrap_or(0);
                    for _ in have..n {
                        cofactor = cofactor.times_linear(c);
                    }
                }
                numerator = numerator.add(&cofactor.scale(coeff));
            }
            values.insert(mu.clone(), (numerator, denominator.clone()));
        }
        Ok(WeingartenTable { k, values })
    }

    pub fn eval(&self, mu: &Partition, d: usize) -> Result<Rational> {
        if d < self.k {
            return Err(Error::DimensionBelowDegree { d, k: self.k });
        }
        let (num, den) = self.values.get(mu).ok_or_else(|| {
            Error::InvalidArgument(format!("{mu} is not a cycle type of S_{}", self.k))
        })?;
        Ok(num.eval(d as i128) / den.eval(d as i128))
    }
}

fn tables() -> &'static [WeingartenTable] {
    static TABLES: OnceLock<Vec<WeingartenTable>> = OnceLock::new();
    TABLES.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|k| WeingartenTable::build(k).expect("embedded character tables verify"))
            .collect()
    })
}

/// `Wg(mu, d)` for a cycle type `mu` of weight `k <= 4`, `d >= k`.
pub fn wg(cycle_type: &Partition, d: usize) -> Result<Rational> {
    let k = cycle_type.weight();
    if k > MAX_DEGREE {
        return Err(Error::DegreeNotSupported(k));
    }
    tables()[k].eval(cycle_type, d)
}

/// `s_lambda(1^d)` by the hook-content formula.
pub fn schur_at_ones(lambda: &Partition, d: usize) -> Rational {
    let num: i128 = lambda.contents().map(|c| d as i128 + c as i128).product();
    let den: i128 = lambda.hooks().iter().map(|&h| h as i128).product();
    Rational::new(num, den)
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

pub fn cycle_type(perm: &[usize]) -> Partition {
    let mut seen = vec![false; perm.len()];
    let mut lens = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        lens.push(len);
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    Partition::new(lens).expect("sorted cycle lengths")
}

/// `E prod_a U_{rows[a], cols[a]} conj(U_{conj_rows[a], conj_cols[a]})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntryMonomial {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub conj_rows: Vec<usize>,
    pub conj_cols: Vec<usize>,
}

impl EntryMonomial {
    /// `prod_a |U_{i_a j_a}|^2`.
    pub fn abs_squared(entries: &[(usize, usize)]) -> Self {
        let rows: Vec<usize> = entries.iter().map(|e| e.0).collect();
        let cols: Vec<usize> = entries.iter().map(|e| e.1).collect();
        EntryMonomial {
            conj_rows: rows.clone(),
            conj_cols: cols.clone(),
            rows,
            cols,
        }
    }

    fn degree(&self) -> usize {
        self.rows.len()
    }

    fn is_balanced(&self) -> bool {
        let sorted = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v
        };
        self.rows.len() == self.cols.len()
            && self.conj_rows.len() == self.conj_cols.len()
            && self.rows.len() == self.conj_rows.len()
            && sorted(&self.rows) == sorted(&self.conj_rows)
            && sorted(&self.cols) == sorted(&self.conj_cols)
    }

    /// Index pattern with labels renumbered by first appearance. Haar moments
    /// depend only on this.
    fn pattern(&self) -> (Vec<u8>, Vec<u8>) {
        fn relabel(a: &[usize], b: &[usize]) -> Vec<u8> {
            let mut seen: Vec<usize> = Vec::new();
            a.iter()
                .chain(b)
                .map(|x| match seen.iter().position(|y| y == x) {
                    Some(p) => p as u8,
                    None => {
                        seen.push(*x);
                        (seen.len() - 1) as u8
                    }
                })
                .collect()
        }
        (
            relabel(&self.rows, &self.conj_rows),
            relabel(&self.cols, &self.conj_cols),
        )
    }
}

/// Exact Haar expectation of an entry monomial of degree `k <= 4`.
pub fn entry_moment(m: &EntryMonomial, d: usize) -> Result<Rational> {
    let k = m.degree();
    if k > MAX_DEGREE {
        return Err(Error::DegreeNotSupported(k));
    }
    if !m.is_balanced() {
        return Ok(Rational::zero());
    }
    if let Some(&i) = m.rows.iter().chain(&m.cols).find(|&&i| i >= d) {
        return Err(Error::InvalidArgument(format!("index {i} out of range for d = {d}")));
    }
    if d < k {
        return Err(Error::DimensionBelowDegree { d, k });
    }
    let perms = permutations(k);
    let mut total = Rational::zero();
    for sigma in &perms {
        if (0..k).any(|a| m.rows[a] != m.conj_rows[sigma[a]]) {
            continue;
        }
        for tau in &perms {
            if (0..k).any(|a| m.cols[a] != m.conj_cols[tau[a]]) {
                continue;
            }
            // sigma o tau^-1
            let mut tau_inv = vec![0; k];
            for (a, &t) in tau.iter().enumerate() {
                tau_inv[t] = a;
            }
            let comp: Vec<usize> = (0..k).map(|a| sigma[tau_inv[a]]).collect();
            total += wg(&cycle_type(&comp), d)?;
        }
    }
    Ok(total)
}

/// [`entry_moment`] memoized on index patterns for one dimension.
#[derive(Debug)]
pub struct MomentCache {
    d: usize,
    memo: HashMap<(Vec<u8>, Vec<u8>), f64>,
}

impl MomentCache {
    pub fn new(d: usize) -> Self {
        MomentCache {
            d,
            memo: HashMap::new(),
        }
    }

    pub fn get(&mut self, m: &EntryMonomial) -> Result<f64> {
        let key = m.pattern();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = entry_moment(m, self.d)?
            .to_f64()
            .expect("finite rational");
        self.memo.insert(key, v);
        Ok(v)
    }
}

fn require_dim(s: &SpectrumVector, k: usize) -> Result<usize> {
    let d = s.dim();
    if d < k {
        return Err(Error::DimensionBelowDegree { d, k });
    }
    Ok(d)
}

/// `E|J(U D_0 U*)|^2 = sum_i sum_{j1 j2} Lambda_j1 Lambda_j2 E|U_{i j1}|^2 |U_{i j2}|^2`.
pub fn exact_m2(s: &SpectrumVector) -> Result<f64> {
    let d = require_dim(s, 2)?;
    let lam = s.centered();
    let mut cache = MomentCache::new(d);
    let mut total = 0.0;
    for i in 0..d {
        for j1 in 0..d {
            for j2 in 0..d {
                let e = cache.get(&EntryMonomial::abs_squared(&[(i, j1), (i, j2)]))?;
                total += lam[j1] * lam[j2] * e;
            }
        }
    }
    Ok(total)
}

/// `E|J(U D_0 U*)|^4`, summing over every row pair `(i1, i2)` and column
/// quadruple. `O(d^6)`; meant for `d <= 8`.
pub fn exact_m4_unreduced(s: &SpectrumVector) -> Result<f64> {
    let d = require_dim(s, 4)?;
    let lam = s.centered();
    let mut cache = MomentCache::new(d);
    let mut total = 0.0;
    for i1 in 0..d {
        for i2 in 0..d {
            for_each_quadruple(d, |j| {
                let w = lam[j[0]] * lam[j[1]] * lam[j[2]] * lam[j[3]];
                if w != 0.0 {
                    let m = EntryMonomial::abs_squared(&[(i1, j[0]), (i1, j[1]), (i2, j[2]), (i2, j[3])]);
                    total += w * cache.get(&m)?;
                }
                Ok(())
            })?;
        }
    }
    Ok(total)
}

/// [`exact_m4_unreduced`] with the row sum collapsed: the moment depends only
/// on whether `i1 = i2`, giving `d` equal-row and `d(d-1)` distinct-row terms.
pub fn exact_m4(s: &SpectrumVector) -> Result<f64> {
    let d = require_dim(s, 4)?;
    let lam = s.centered();
    let mut cache = MomentCache::new(d);
    let (same, diff) = (d as f64, (d * (d - 1)) as f64);
    let mut total = 0.0;
    for_each_quadruple(d, |j| {
        let w = lam[j[0]] * lam[j[1]] * lam[j[2]] * lam[j[3]];
        if w != 0.0 {
            let eq = cache.get(&EntryMonomial::abs_squared(&[(0, j[0]), (0, j[1]), (0, j[2]), (0, j[3])]))?;
            let ne = cache.get(&EntryMonomial::abs_squared(&[(0, j[0]), (0, j[1]), (1, j[2]), (1, j[3])]))?;
            total += w * (same * eq + diff * ne);
        }
        Ok(())
    })?;
    Ok(total)
}

fn for_each_quadruple<F>(d: usize, mut f: F) -> Result<()>
where
    F: FnMut([usize; 4]) -> Result<()>,
{
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    f([a, b, c, e])?;
                }
            }
        }
    }
    Ok(())
}
