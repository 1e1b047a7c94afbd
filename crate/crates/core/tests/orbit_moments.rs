use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randonb::haar::{mc_characteristic, mc_orbit_moments};
use randonb::orbit::{
    center_spectrum, moment2_exact, moment2_from_schur_expansion, moment4_exact, moment4_from_schur_expansion,
    orbital_fourier_truncated, variance_y,
};
use randonb::weingarten::{exact_m2, exact_m4};
use randonb::HaarSampler;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn random_spectrum(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=12).prop_flat_map(|d| prop::collection::vec(-3.0f64..3.0, d))
}

proptest! {
    #[test]
    fn homogeneity(lambda in spectrum(), c in -4.0f64..4.0) {
        prop_assume!(c.abs() > 1e-3);
        let s = center_spectrum(&lambda).unwrap();
        let t = s.scaled(c);
        let m2 = moment2_exact(&s);
        let m4 = moment4_exact(&s);
        prop_assert!((moment2_exact(&t) - c.powi(2) * m2).abs() <= 1e-12 * (c.powi(2) * m2).max(1e-300));
        prop_assert!((moment4_exact(&t) - c.powi(4) * m4).abs() <= 1e-12 * (c.powi(4) * m4).max(1e-300));
    }

    #[test]
    fn permutation_invariance(lambda in spectrum(), seed in any::<u64>()) {
        let mut perm = lambda.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let (s, t) = (center_spectrum(&lambda).unwrap(), center_spectrum(&perm).unwrap());
        prop_assert!(rel(moment2_exact(&t), moment2_exact(&s)) < 1e-12 || moment2_exact(&s) < 1e-300);
        prop_assert!(rel(moment4_exact(&t), moment4_exact(&s)) < 1e-12 || moment4_exact(&s) < 1e-300);
    }

    #[test]
    fn translation_covariance(lambda in spectrum(), shift in -10.0f64..10.0) {
        let moved: Vec<f64> = lambda.iter().map(|x| x + shift).collect();
        let (s, t) = (center_spectrum(&lambda).unwrap(), center_spectrum(&moved).unwrap());
        let tol = 1e-12 * (1.0 + shift.abs()).powi(4);
        prop_assert!((moment2_exact(&t) - moment2_exact(&s)).abs() <= tol * (1.0 + moment2_exact(&s)));
        prop_assert!((moment4_exact(&t) - moment4_exact(&s)).abs() <= tol * (1.0 + moment4_exact(&s)));
    }

    #[test]
    fn cauchy_schwarz(lambda in spectrum()) {
        let s = center_spectrum(&lambda).unwrap();
        let m2 = moment2_exact(&s);
        prop_assert!(m2 >= 0.0);
        prop_assert!(moment4_exact(&s) >= m2 * m2 * (1.0 - 1e-12));
        prop_assert!(variance_y(&s) >= 0.0);
    }

    #[test]
    fn schur_expansion_agrees_with_closed_forms(lambda in spectrum()) {
        let s = center_spectrum(&lambda).unwrap();
        prop_assert!((moment2_from_schur_expansion(&s) - moment2_exact(&s)).abs() <= 1e-10 * (1.0 + moment2_exact(&s)));
        prop_assert!((moment4_from_schur_expansion(&s) - moment4_exact(&s)).abs() <= 1e-10 * (1.0 + moment4_exact(&s)));
    }
}

#[test]
fn closed_forms_match_weingarten_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 2..=8 {
        for _ in 0..10 {
            let s = center_spectrum(&random_spectrum(&mut rng, d)).unwrap();
            assert!(rel(exact_m2(&s).unwrap(), moment2_exact(&s)) < 1e-12, "m2, d = {d}");
            if d >= 4 {
                assert!(rel(exact_m4(&s).unwrap(), moment4_exact(&s)) < 1e-10, "m4, d = {d}");
            }
        }
    }
}

#[test]
fn low_dimensions_match_monte_carlo() {
    // Below the degree-4 Weingarten range the closed form is checked by sampling.
    for d in 1..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + d as u64);
        let spectra: Vec<_> = (0..3).map(|_| center_spectrum(&random_spectrum(&mut rng, d)).unwrap()).collect();
        let est = mc_orbit_moments(&spectra, 100_000, &HaarSampler::new(21, d as u64, d)).unwrap();
        for (s, e) in spectra.iter().zip(&est) {
            assert!(e.m2.within_sigmas(moment2_exact(s), 4.0) || e.m2.stderr == 0.0, "d = {d}: {:?}", e.m2);
            assert!(e.m4.within_sigmas(moment4_exact(s), 4.0) || e.m4.stderr == 0.0, "d = {d}: {:?}", e.m4);
        }
    }
}

#[test]
fn closed_forms_match_monte_carlo() {
    for (d, samples) in [(3usize, 100_000u64), (10, 100_000), (50, 20_000)] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let spectra: Vec<_> = (0..3).map(|_| center_spectrum(&random_spectrum(&mut rng, d)).unwrap()).collect();
        let est = mc_orbit_moments(&spectra, samples, &HaarSampler::new(2024, 1, d)).unwrap();
        for (s, e) in spectra.iter().zip(&est) {
            assert!(e.m2.within_sigmas(moment2_exact(s), 4.0), "m2 d = {d}: {:?} vs {}", e.m2, moment2_exact(s));
            assert!(e.m4.within_sigmas(moment4_exact(s), 4.0), "m4 d = {d}: {:?} vs {}", e.m4, moment4_exact(s));
            assert!(e.m4.mean >= e.m2.mean.powi(2) - 4.0 * (e.m4.stderr + 2.0 * e.m2.mean * e.m2.stderr));
        }
    }
}

#[test]
fn truncated_fourier_transform_matches_characteristic_function() {
    let s = center_spectrum(&[1.0, 0.4, -0.3, -1.1]).unwrap();
    let x = [0.12, -0.05, 0.08, -0.1];
    let est = mc_characteristic(&s, &x, 100_000, &HaarSampler::new(5, 0, 4)).unwrap();
    let series = orbital_fourier_truncated(&s, &x, 4).unwrap();
    let bound = 4.0 * est.stderr + 1e-4;
    assert!((est.mean - series).norm() <= bound, "{:?} vs {series}", est.mean);
}

#[test]
fn fourier_laplacian_at_origin_is_minus_m2() {
    for d in [3usize, 6, 9] {
        let lambda: Vec<f64> = (0..d).map(|i| (i as f64 * 0.7).sin()).collect();
        let s = center_spectrum(&lambda).unwrap();
        let h = 1e-3;
        let f0 = orbital_fourier_truncated(&s, &vec![0.0; d], 4).unwrap().re;
        let mut lap = 0.0;
        for i in 0..d {
            let mut xp = vec![0.0; d];
            xp[i] = h;
            let mut xm = vec![0.0; d];
            xm[i] = -h;
            let fp = orbital_fourier_truncated(&s, &xp, 4).unwrap().re;
            let fm = orbital_fourier_truncated(&s, &xm, 4).unwrap().re;
            lap += (fp - 2.0 * f0 + fm) / (h * h);
        }
        assert!((lap + moment2_exact(&s)).abs() < 1e-5 * (1.0 + moment2_exact(&s)), "d = {d}: {lap}");
    }
}
