//! Acceptance suite. Each criterion is one test that prints a single
//! `PASS`/`FAIL` line to stderr (bypassing output capture) and then asserts.

mod common;

use std::collections::BTreeMap;
use std::io::Write;

use common::{elementary_brute, schur_poly, MPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randonb::haar::mc_orbit_moments;
use randonb::orbit::{beta4_resolved, beta4_statement, center_spectrum, moment2_exact, moment4_exact, variance_y};
use randonb::qe::slln_run;
use randonb::stats::Accumulator;
use randonb::sympoly::{complete, elementary, elementary_all, newton_e_from_p, partitions_of, power_sum, schur};
use randonb::torus::{lattice_shell, multiplicity_sequence, qe_experiment};
use randonb::weingarten::{entry_moment, exact_m2, exact_m4, EntryMonomial};
use randonb::{HaarSampler, Partition, SpectrumVector, SphereFunction, TorusObservable};

fn verdict(id: u32, title: &str, ok: bool, detail: &str) {
    let line = format!(
        "acceptance {id:>2} {} {title}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(std::io::stderr().lock(), "{line}");
    assert!(ok, "{line}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_centered(rng: &mut ChaCha8Rng, d: usize) -> SpectrumVector {
    let lambda: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    center_spectrum(&lambda).unwrap()
}

fn grid_spectrum(d: usize) -> SpectrumVector {
    let lambda: Vec<f64> = (0..d).map(|j| -1.0 + 2.0 * j as f64 / (d as f64 - 1.0)).collect();
    center_spectrum(&lambda).unwrap()
}

fn ratio(r: num_rational::Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[test]
fn criterion_01_second_moment() {
    let mut worst_sigma: f64 = 0.0;
    let mut mc_ok = true;
    for (idx, d) in [3usize, 10, 50].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + d as u64);
        let spectra: Vec<_> = (0..3).map(|_| random_centered(&mut rng, d)).collect();
        let est = mc_orbit_moments(&spectra, 100_000, &HaarSampler::new(20_240_601, idx as u64, d)).unwrap();
        for (s, e) in spectra.iter().zip(&est) {
            let z = e.m2.sigmas_from(moment2_exact(s));
            worst_sigma = worst_sigma.max(z);
            mc_ok &= z <= 4.0;
        }
    }
    let mut worst_rel: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 2..=8 {
        for _ in 0..5 {
            let s = random_centered(&mut rng, d);
            worst_rel = worst_rel.max(rel(exact_m2(&s).unwrap(), moment2_exact(&s)));
        }
    }
    verdict(
        1,
        "m2 = p2/(d+1)",
        mc_ok && worst_rel <= 1e-12,
        &format!("worst MC deviation {worst_sigma:.2} sigma (limit 4), worst Weingarten rel err {worst_rel:.1e} (limit 1e-12)"),
    );
}

#[test]
fn criterion_02_beta4_adjudication() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rows = Vec::new();
    let (mut statement_all, mut resolved_all) = (true, true);
    for d in 4..=8 {
        for _ in 0..3 {
            let s = random_centered(&mut rng, d);
            let oracle = exact_m4(&s).unwrap();
            let p2sq = s.p(2).powi(2);
            let rs = rel(beta4_statement(d).unwrap() * p2sq, oracle);
            let rr = rel(beta4_resolved(d).unwrap() * p2sq, oracle);
            let rc = rel(moment4_exact(&s), oracle);
            statement_all &= rs <= 1e-10;
            resolved_all &= rr <= 1e-10;
            rows.push(format!("d={d} statement {rs:.2e} final-display {rr:.2e} corrected {rc:.1e}"));
        }
    }
    let matching = match (statement_all, resolved_all) {
        (true, false) => "statement form",
        (false, true) => "final-display form",
        (true, true) => "both forms",
        (false, false) => "neither printed form",
    };
    for r in &rows {
        let _ = writeln!(std::io::stderr().lock(), "    {r}");
    }
    verdict(
        2,
        "exact m4 matches exactly one printed beta4 form",
        statement_all != resolved_all,
        &format!("oracle matches {matching} at d=4..8 (relative residuals listed above)"),
    );
}

#[test]
fn criterion_03_variance_asymptotics() {
    let check = |d: usize| {
        let s = grid_spectrum(d);
        variance_y(&s) * (d * d) as f64 / s.p(2).powi(2)
    };
    let (v100, v400) = (check(100), check(400));
    let ok = (v100 / 3.0 - 1.0).abs() <= 0.15 && (v400 / 3.0 - 1.0).abs() <= 0.05;
    verdict(
        3,
        "Var(Y) d^2/p2^2 near 3",
        ok,
        &format!("certified closed form gives {v100:.5} at d=100 (need 3 +- 15%), {v400:.5} at d=400 (need 3 +- 5%)"),
    );
}

#[test]
fn criterion_04_quartic_limit() {
    let d = 1000;
    let s = grid_spectrum(d);
    let r = moment4_exact(&s) / moment2_exact(&s).powi(2);
    verdict(
        4,
        "m4/m2^2 near 4",
        (r / 4.0 - 1.0).abs() <= 0.01,
        &format!("certified closed form gives {r:.6} at d=1000 (need 4 +- 1%)"),
    );
}

#[test]
fn criterion_05_laplacian_coefficients() {
    type Printed = fn(i64) -> i64;
    let printed: [(&[usize], u32, Printed); 7] = [
        (&[1, 1], 1, |_| 0),
        (&[2], 1, |d| 2 * d),
        (&[1, 1, 1, 1], 2, |_| 0),
        (&[2, 1, 1], 2, |_| 0),
        (&[2, 2], 2, |d| 4 * d * (d - 1)),
        (&[4], 2, |d| 12 * d * d + 4 * d * (d - 1)),
        (&[3, 1], 2, |d| -4 * d * (d - 1)),
    ];
    let mut mismatches = Vec::new();
    for d in 4..=6usize {
        for (mu, times, want) in &printed {
            let mut p: MPoly = schur_poly(mu, d);
            for _ in 0..*times {
                p = p.laplacian();
            }
            let got = p.at_zero();
            let expected = want(d as i64);
            if got != expected {
                mismatches.push(format!("{} d={d}: oracle {got}, printed {expected}", Partition::new(mu.to_vec()).unwrap()));
            }
        }
    }
    for m in &mismatches {
        let _ = writeln!(std::io::stderr().lock(), "    {m}");
    }
    verdict(
        5,
        "Laplacian-at-zero integers",
        mismatches.is_empty(),
        &format!("{} of 21 (partition, d) values disagree with the tabulated integers", mismatches.len()),
    );
}

#[test]
fn criterion_06_symmetric_function_identities() {
    const CASES: usize = 1000;
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let oracles: BTreeMap<(Partition, usize), MPoly> = (1..=4)
        .flat_map(|d| (0..=4).flat_map(move |n| partitions_of(n, d).into_iter().map(move |mu| (mu, d))))
        .map(|(mu, d)| {
            let p = schur_poly(mu.parts(), d);
            ((mu, d), p)
        })
        .collect();
    let mut failures = 0usize;
    let mut worst: f64 = 0.0;
    let mut check = |a: f64, b: f64, scale: f64| {
        let err = (a - b).abs() / scale.max(1.0);
        worst = worst.max(err);
        if err > TOL {
            failures += 1;
        }
    };
    for case in 0..CASES {
        let d = 1 + case % 8;
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ax: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let p: Vec<f64> = (1..=4).map(|k| power_sum(k, &x)).collect();
        let e = newton_e_from_p(&p);
        let e_direct = elementary_all(4, &x);
        for k in 0..=4usize {
            let scale = complete(k, &ax);
            if k >= 1 {
                check(e[k - 1], elementary_brute(k, &x), scale);
            }
            check(schur(&Partition::column(k), &x), elementary(k, &x), scale);
            check(schur(&Partition::row(k), &x), complete(k, &x), scale);
        }
        let s4 = complete(4, &ax);
        check(schur(&Partition::new(vec![2, 2]).unwrap(), &x), e_direct[2].powi(2) - e_direct[1] * e_direct[3], s4);
        check(schur(&Partition::new(vec![2]).unwrap(), &x), e_direct[1].powi(2) - e_direct[2], s4);
        if d <= 4 {
            for ((mu, dd), poly) in &oracles {
                if *dd == d {
                    check(schur(mu, &x), poly.eval(&x), 4.0 * complete(mu.weight(), &ax));
                }
            }
        }
    }
    verdict(
        6,
        "Newton, Schur coincidence and Jacobi-Trudi identities",
        failures == 0,
        &format!("{CASES} random cases, {failures} violations, worst scaled error {worst:.1e} (limit 1e-12)"),
    );
}

#[test]
fn criterion_07_haar_statistics() {
    const SAMPLES: u64 = 100_000;
    let patterns: [(&str, [(usize, usize); 2], bool); 4] = [
        ("|U00|^4", [(0, 0), (0, 0)], true),
        ("|U00|^2|U01|^2", [(0, 0), (0, 1)], false),
        ("|U00|^2|U10|^2", [(0, 0), (1, 0)], false),
        ("|U00|^2|U11|^2", [(0, 0), (1, 1)], false),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for d in [4usize, 20] {
        let mut sampler = HaarSampler::new(7, d as u64, d);
        let mut first = vec![Accumulator::default(); 2];
        let mut second = vec![Accumulator::default(); patterns.len()];
        for _ in 0..SAMPLES {
            let u = sampler.sample_unitary();
            first[0].push(u[(0, 0)].norm_sqr());
            first[1].push(u[(d - 1, 1)].norm_sqr());
            for (acc, (_, p, _)) in second.iter_mut().zip(&patterns) {
                acc.push(p.iter().map(|&(i, j)| u[(i, j)].norm_sqr()).product());
            }
        }
        let mut worst: f64 = 0.0;
        for acc in &first {
            worst = worst.max(acc.estimate().sigmas_from(1.0 / d as f64));
        }
        for (acc, (name, p, same_col)) in second.iter().zip(&patterns) {
            let est = acc.estimate();
            let exact = ratio(entry_moment(&EntryMonomial::abs_squared(p), d).unwrap());
            worst = worst.max(est.sigmas_from(exact));
            if d == 20 && p[0].0 == p[1].0 {
                let asym = (1.0 + if *same_col { 1.0 } else { 0.0 }) / (d * d) as f64;
                let r = est.mean / asym;
                ok &= (r - 1.0).abs() <= 0.10;
                details.push(format!("{name} asymptotic ratio {r:.3}"));
            }
        }
        ok &= worst <= 4.0;
        details.push(format!("d={d} worst {worst:.2} sigma"));
    }
    verdict(7, "Haar entry moments", ok, &details.join(", "));
}

#[test]
fn criterion_08_multiplicity_growth() {
    let seq = multiplicity_sequence(5, 200, 1).unwrap();
    let slope = seq.slope.unwrap_or(f64::NAN);
    let mut mismatches = 0;
    for n in 1..=100u64 {
        let mut brute = 0usize;
        for a in -10i64..=10 {
            for b in -10i64..=10 {
                if (a * a + b * b) as u64 == n {
                    brute += 1;
                }
            }
        }
        let got = lattice_shell(2, n).map(|s| s.multiplicity()).unwrap_or(0);
        if got != brute {
            mismatches += 1;
        }
    }
    verdict(
        8,
        "lattice multiplicity growth",
        (slope - 3.0).abs() <= 0.3 && mismatches == 0,
        &format!("dim 5 log-log slope {slope:.3} (need 3 +- 0.3), dim 2 count mismatches {mismatches} for n <= 100"),
    );
}

#[test]
fn criterion_09_torus_quantum_variance() {
    let dim = 5;
    let mut pot = BTreeMap::new();
    pot.insert(vec![0; dim], Complex64::new(1.0, 0.0));
    pot.insert(vec![1, 0, 0, 0, 0], Complex64::new(0.4, 0.2));
    pot.insert(vec![-1, 0, 0, 0, 0], Complex64::new(0.4, -0.2));
    pot.insert(vec![0, 1, 1, 0, 0], Complex64::new(-0.25, 0.0));
    pot.insert(vec![0, -1, -1, 0, 0], Complex64::new(-0.25, 0.0));
    let g = SphereFunction::constant(dim, 1.0)
        .plus(&SphereFunction::quartic_harmonic(dim, 0, 1), 0.5)
        .unwrap()
        .plus(&SphereFunction::product(dim, 2, 3), 0.3)
        .unwrap();
    let obs = TorusObservable::new(dim, pot, g).unwrap();
    let shells: Vec<_> = (3..=9u64)
        .map(|n| lattice_shell(dim, n).unwrap())
        .filter(|s| s.multiplicity() >= 50)
        .collect();
    let sampler = HaarSampler::new(9, 0, 1);
    let exp = qe_experiment(&shells, &obs, 20, &sampler).unwrap();
    let worst = exp
        .shells
        .iter()
        .map(|s| s.v_trace.sigmas_from(s.v_trace_expected))
        .fold(0.0, f64::max);
    let scalar = qe_experiment(&shells[..2], &TorusObservable::scalar(dim, 1.5), 20, &sampler).unwrap();
    let scalar_zero = scalar
        .shells
        .iter()
        .all(|s| s.v_trace.mean == 0.0 && s.v_liouville.mean == 0.0 && s.y.mean == 0.0);
    verdict(
        9,
        "torus quantum variance over random bases",
        worst <= 4.0 && scalar_zero,
        &format!(
            "{} shells (d_N {}..{}), worst deviation {worst:.2} sigma (limit 4), scalar observable exactly zero: {scalar_zero}",
            exp.shells.len(),
            exp.shells.first().map(|s| s.multiplicity).unwrap_or(0),
            exp.shells.last().map(|s| s.multiplicity).unwrap_or(0),
        ),
    );
}

#[test]
fn criterion_10_partial_sums() {
    const N: usize = 200;
    // The d = 1 level has a zero centered spectrum, so Y_1 = E Y_1 = 0.
    let spectra: Vec<_> = (2..=N).map(grid_spectrum).collect();
    let band_var: f64 = spectra.iter().map(|s| variance_y(s) / (s.dim() * s.dim()) as f64).sum();
    let band = 3.0 * band_var.sqrt() / N as f64;
    let mut passes = 0;
    let mut values = Vec::new();
    for seed in 0..5u64 {
        let run = slln_run(&spectra, &HaarSampler::new(10_000 + seed, 0, 2)).unwrap();
        let s_n = run.levels.last().unwrap().partial_sum;
        let stat = (s_n / N as f64).abs();
        if stat <= band {
            passes += 1;
        }
        values.push(format!("{stat:.2e}"));
    }
    verdict(
        10,
        "SLLN partial sums inside the 3-sigma band",
        passes >= 4,
        &format!("|S_N/N| over 5 seeds [{}], band {band:.2e}, {passes}/5 inside (need 4)", values.join(", ")),
    );
}
