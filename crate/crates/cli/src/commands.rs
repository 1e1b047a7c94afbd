//! One function per subcommand. Each returns the JSON result payload, the CSV
//! rows, and whether an oracle disagreed.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randonb::haar::{mc_orbit_moments, GENERATOR};
use randonb::orbit::{beta4_resolved, beta4_statement, center_spectrum, moment2_exact, moment4_exact};
use randonb::qe::{slln_run, LevelRecord};
use randonb::report::Provenance;
use randonb::torus::{compress_observable, lattice_shell, multiplicity_sequence, qe_experiment, shell_counts};
use randonb::weingarten::exact_m4;
use randonb::{Complex64, HaarSampler, MomentReport, SpectrumVector, SphereFunction, TorusObservable};
use serde::Serialize;

use crate::config::{ExperimentConfig, SpectrumSource};

/// Relative tolerance for matching a candidate `beta_4` form.
pub const BETA4_TOL: f64 = 1e-10;
/// Monte-Carlo acceptance band in standard errors.
pub const SIGMA_BAND: f64 = 4.0;

pub struct Outcome {
    pub result: serde_json::Value,
    pub csv: Vec<u8>,
    pub summary: String,
    pub discrepancy: bool,
}

fn csv_rows<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().context("flushing CSV")
}

fn outcome<T: Serialize, R: Serialize>(result: &T, rows: &[R], summary: String, discrepancy: bool) -> Result<Outcome> {
    Ok(Outcome {
        result: serde_json::to_value(result)?,
        csv: csv_rows(rows)?,
        summary,
        discrepancy,
    })
}

/// Potential `1 + cos(x_1)` times multiplier `1 + (x_1^2 - x_2^2)/2`.
pub fn default_observable(dim: usize) -> TorusObservable {
    let mut pot = BTreeMap::new();
    pot.insert(vec![0; dim], Complex64::new(1.0, 0.0));
    let mut e1 = vec![0; dim];
    e1[0] = 1;
    pot.insert(e1.clone(), Complex64::new(0.5, 0.0));
    e1[0] = -1;
    pot.insert(e1, Complex64::new(0.5, 0.0));
    let g = SphereFunction::constant(dim, 1.0)
        .plus(&SphereFunction::quadratic_difference(dim, 0, 1), 0.5)
        .expect("same dimension");
    TorusObservable::new(dim, pot, g).expect("real potential")
}

pub fn grid(d: usize) -> Vec<f64> {
    (0..d).map(|j| -1.0 + 2.0 * j as f64 / (d as f64 - 1.0)).collect()
}

fn spectrum_from(source: &SpectrumSource) -> Result<SpectrumVector> {
    let lambda = match source {
        SpectrumSource::List { values } => values.clone(),
        SpectrumSource::Grid { d } => grid(*d),
        SpectrumSource::Shell { dim, n } => {
            let shell = lattice_shell(*dim, *n)?;
            let t = compress_observable(&shell, &default_observable(*dim))?;
            t.spectrum().lambda().to_vec()
        }
    };
    Ok(center_spectrum(&lambda)?)
}

#[derive(Serialize)]
struct ClaimRow<'a> {
    quantity: &'a str,
    value: f64,
    source: &'a str,
    samples: Option<u64>,
    stderr: Option<f64>,
}

pub fn moments(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = spectrum_from(&cfg.spectrum)?;
    let sampler = HaarSampler::new(cfg.seed, 0, s.dim());
    let report = MomentReport::build(&s, cfg.samples, &sampler, cfg.weingarten_max_d)?;
    let claims = [
        ("m2_exact", Some(&report.m2_exact)),
        ("m4_exact", Some(&report.m4_exact)),
        ("variance_exact", Some(&report.variance_exact)),
        ("m2_weingarten", report.m2_weingarten.as_ref()),
        ("m4_weingarten", report.m4_weingarten.as_ref()),
        ("m2_mc", Some(&report.m2_mc)),
        ("m4_mc", Some(&report.m4_mc)),
    ];
    let rows: Vec<ClaimRow> = claims
        .iter()
        .filter_map(|(q, c)| c.map(|c| (q, c)))
        .map(|(q, c)| {
            let (source, samples) = match c.provenance {
                Provenance::ClosedForm => ("closed-form", None),
                Provenance::Weingarten => ("weingarten", None),
                Provenance::Enumeration => ("enumeration", None),
                Provenance::MonteCarlo { samples, .. } => ("monte-carlo", Some(samples)),
            };
            ClaimRow {
                quantity: q,
                value: c.value,
                source,
                samples,
                stderr: c.stderr(),
            }
        })
        .collect();
    let disc = &report.discrepancies;
    let bad = disc.m2_mc_sigmas > SIGMA_BAND || disc.m4_mc_sigmas > SIGMA_BAND;
    let summary = format!(
        "d = {}: m2 = {} (MC {:.2} sigma), m4 = {} (MC {:.2} sigma)",
        report.d, report.m2_exact.value, disc.m2_mc_sigmas, report.m4_exact.value, disc.m4_mc_sigmas
    );
    outcome(&report, &rows, summary, bad)
}

#[derive(Serialize)]
struct VerifyRow {
    d: usize,
    spectrum: usize,
    p2: f64,
    p4: f64,
    m2_exact: f64,
    m2_mc: f64,
    m2_stderr: f64,
    m2_sigmas: f64,
    m4_exact: f64,
    m4_mc: f64,
    m4_stderr: f64,
    m4_sigmas: f64,
    samples: u64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyResult<'a> {
    sigma_band: f64,
    all_pass: bool,
    rows: &'a [VerifyRow],
    spectra: Vec<Vec<f64>>,
}

/// Centered spectra drawn uniformly from `[-1, 1]`, seeded by `(seed, d)`.
fn random_spectra(seed: u64, d: usize, count: usize) -> Result<Vec<SpectrumVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(d as u64);
    (0..count)
        .map(|_| {
            let lambda: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            Ok(center_spectrum(&lambda)?)
        })
        .collect()
}

pub fn mc_verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut spectra_out = Vec::new();
    for (idx, &d) in cfg.d.iter().enumerate() {
        let spectra = random_spectra(cfg.seed, d, cfg.spectra)?;
        let est = mc_orbit_moments(&spectra, cfg.samples, &HaarSampler::new(cfg.seed, idx as u64, d))?;
        for (k, (s, e)) in spectra.iter().zip(&est).enumerate() {
            let (m2, m4) = (moment2_exact(s), moment4_exact(s));
            let (z2, z4) = (e.m2.sigmas_from(m2), e.m4.sigmas_from(m4));
            rows.push(VerifyRow {
                d,
                spectrum: k,
                p2: s.p(2),
                p4: s.p(4),
                m2_exact: m2,
                m2_mc: e.m2.mean,
                m2_stderr: e.m2.stderr,
                m2_sigmas: z2,
                m4_exact: m4,
                m4_mc: e.m4.mean,
                m4_stderr: e.m4.stderr,
                m4_sigmas: z4,
                samples: cfg.samples,
                pass: z2 <= SIGMA_BAND && z4 <= SIGMA_BAND,
            });
            spectra_out.push(s.lambda().to_vec());
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let worst = rows.iter().map(|r| r.m2_sigmas.max(r.m4_sigmas)).fold(0.0, f64::max);
    let summary = format!("{} spectra, worst deviation {worst:.2} sigma", rows.len());
    let result = VerifyResult {
        sigma_band: SIGMA_BAND,
        all_pass,
        rows: &rows,
        spectra: spectra_out,
    };
    outcome(&result, &rows, summary, !all_pass)
}

#[derive(Serialize)]
struct Beta4Row {
    d: usize,
    spectrum: usize,
    beta4_statement: f64,
    beta4_resolved: f64,
    ratio: f64,
    p2: f64,
    p4: f64,
    m4_weingarten: f64,
    rel_statement: f64,
    rel_resolved: f64,
    rel_closed_form: f64,
}

#[derive(Serialize)]
struct Beta4Result<'a> {
    tolerance: f64,
    /// `statement`, `final-display`, `both` or `neither`.
    matching_form: &'a str,
    closed_form_matches: bool,
    rows: &'a [Beta4Row],
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn beta4_adjudicate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &d in &cfg.d {
        let (bs, br) = (beta4_statement(d)?, beta4_resolved(d)?);
        for (k, s) in random_spectra(cfg.seed, d, cfg.spectra)?.iter().enumerate() {
            let oracle = exact_m4(s)?;
            let p2sq = s.p(2).powi(2);
            rows.push(Beta4Row {
                d,
                spectrum: k,
                beta4_statement: bs,
                beta4_resolved: br,
                ratio: bs / br,
                p2: s.p(2),
                p4: s.p(4),
                m4_weingarten: oracle,
                rel_statement: rel(bs * p2sq, oracle),
                rel_resolved: rel(br * p2sq, oracle),
                rel_closed_form: rel(moment4_exact(s), oracle),
            });
        }
    }
    let stmt = rows.iter().all(|r| r.rel_statement <= BETA4_TOL);
    let res = rows.iter().all(|r| r.rel_resolved <= BETA4_TOL);
    let matching_form = match (stmt, res) {
        (true, false) => "statement",
        (false, true) => "final-display",
        (true, true) => "both",
        (false, false) => "neither",
    };
    let closed_form_matches = rows.iter().all(|r| r.rel_closed_form <= BETA4_TOL);
    let summary = format!(
        "oracle matches {matching_form} printed form(s); p4-corrected closed form matches: {closed_form_matches}"
    );
    let result = Beta4Result {
        tolerance: BETA4_TOL,
        matching_form,
        closed_form_matches,
        rows: &rows,
    };
    outcome(&result, &rows, summary, stmt == res)
}

#[derive(Serialize)]
struct SllnResult<'a> {
    spectrum: &'a str,
    levels_from_d: usize,
    n: usize,
    final_partial_sum: f64,
    statistic: f64,
    band: f64,
    within_band: bool,
    run: &'a randonb::SequenceRun,
}

pub fn slln(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n_max as usize;
    let spectra: Vec<SpectrumVector> = (2..=n).map(|d| center_spectrum(&grid(d))).collect::<Result<_, _>>()?;
    let run = slln_run(&spectra, &HaarSampler::new(cfg.seed, 0, 2))?;
    let var: f64 = run.levels.iter().map(|l| l.y_variance / (l.dim * l.dim) as f64).sum();
    let band = 3.0 * var.sqrt() / n as f64;
    let s_n = run.levels.last().map(|l| l.partial_sum).unwrap_or(0.0);
    let statistic = (s_n / n as f64).abs();
    let result = SllnResult {
        spectrum: "grid on [-1, 1] with d_n = n points; level d = 1 is identically zero",
        levels_from_d: 2,
        n,
        final_partial_sum: s_n,
        statistic,
        band,
        within_band: statistic <= band,
        run: &run,
    };
    let rows: &[LevelRecord] = &run.levels;
    let summary = format!("|S_N/N| = {statistic:.3e}, 3-sigma band {band:.3e}");
    outcome(&result, rows, summary, false)
}

#[derive(Serialize)]
struct ShellRow {
    dim: usize,
    n: u64,
    multiplicity: u64,
}

pub fn torus_shells(cfg: &ExperimentConfig) -> Result<Outcome> {
    let seq = multiplicity_sequence(cfg.dim, cfg.n_max, cfg.min_multiplicity)?;
    let rows: Vec<ShellRow> = seq
        .shells
        .iter()
        .filter(|(n, _)| *n >= cfg.n_min)
        .map(|&(n, multiplicity)| ShellRow {
            dim: cfg.dim,
            n,
            multiplicity,
        })
        .collect();
    let summary = format!(
        "{} shells, log-log slope {}",
        rows.len(),
        seq.slope.map(|s| format!("{s:.4}")).unwrap_or_else(|| "undefined".into())
    );
    #[derive(Serialize)]
    struct R<'a> {
        source: &'a str,
        sequence: &'a randonb::torus::MultiplicitySequence,
    }
    outcome(&R { source: "enumeration", sequence: &seq }, &rows, summary, false)
}

#[derive(Serialize)]
struct QeRow {
    dim: usize,
    n: u64,
    multiplicity: usize,
    trace_deviation: f64,
    p2: f64,
    v_trace_mean: f64,
    v_trace_stderr: f64,
    v_trace_expected: f64,
    v_trace_sigmas: f64,
    v_liouville_mean: f64,
    v_liouville_stderr: f64,
    y_mean: f64,
    y_stderr: f64,
    y_expected: f64,
    y_variance_expected: f64,
    draws: u64,
}

pub fn torus_qe(cfg: &ExperimentConfig) -> Result<Outcome> {
    let counts = shell_counts(cfg.dim, cfg.n_max);
    let shells = (cfg.n_min..=cfg.n_max)
        .filter(|&n| counts[n as usize] > 0 && counts[n as usize] >= cfg.min_multiplicity)
        .map(|n| lattice_shell(cfg.dim, n))
        .collect::<Result<Vec<_>, _>>()?;
    if shells.is_empty() {
        anyhow::bail!(
            "no shells with n in {}..={} and multiplicity >= {}",
            cfg.n_min,
            cfg.n_max,
            cfg.min_multiplicity
        );
    }
    let obs = default_observable(cfg.dim);
    let exp = qe_experiment(&shells, &obs, cfg.draws, &HaarSampler::new(cfg.seed, 0, 1))?;
    let rows: Vec<QeRow> = exp
        .shells
        .iter()
        .map(|s| QeRow {
            dim: cfg.dim,
            n: s.n,
            multiplicity: s.multiplicity,
            trace_deviation: s.trace_deviation,
            p2: s.p2,
            v_trace_mean: s.v_trace.mean,
            v_trace_stderr: s.v_trace.stderr,
            v_trace_expected: s.v_trace_expected,
            v_trace_sigmas: s.v_trace.sigmas_from(s.v_trace_expected),
            v_liouville_mean: s.v_liouville.mean,
            v_liouville_stderr: s.v_liouville.stderr,
            y_mean: s.y.mean,
            y_stderr: s.y.stderr,
            y_expected: s.y_expected,
            y_variance_expected: s.y_variance_expected,
            draws: cfg.draws,
        })
        .collect();
    let worst = rows.iter().map(|r| r.v_trace_sigmas).fold(0.0, f64::max);
    let summary = format!("{} shells, worst V_A deviation {worst:.2} sigma", rows.len());
    #[derive(Serialize)]
    struct R<'a> {
        observable: &'a TorusObservable,
        experiment: &'a randonb::torus::TorusExperiment,
    }
    outcome(
        &R {
            observable: &obs,
            experiment: &exp,
        },
        &rows,
        summary,
        false,
    )
}

pub fn generator() -> &'static str {
    GENERATOR
}
