//! Experiment harness: convergence tables, property suites and the
//! CSV/JSON artifacts the command-line front end writes.
//!
//! Output formats (version 1):
//!
//! * `reports.json`: JSON array of [`PropertyReport`] objects with keys
//!   `suite, level, samples, failures, worst_margin, seed, tol`.
//! * `summary.csv`: the same fields, one row per report, header included.
//! * convergence CSV: `n,restricted_energy,tail_energy,tail_norm_sq,sqrt_gap`.
//! * trajectory CSV: `t,trace_re,trace_im,l2_norm,energy,min_eig,max_eig`.
//!
//! All numbers use `.` as decimal separator and the shortest round-trip
//! representation, so identical configurations give byte-identical files.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derivation::{bimodule_left, bimodule_right, derivation_energy, derive};
use crate::error::{Error, Result};
use crate::expectations::{cond_expect, project_p, project_q};
use crate::forms::{
    amplified_form, build_from_family, commutator_form_eval, dirichlet_check, CompatibleFamily,
    QuadraticForm,
};
use crate::linalg;
use crate::report::PropertyReport;
use crate::superop::{
    certify_complete_positivity, cp_spot_check, markov_check, symmetry_conservativity_check,
    Semigroup, SuperOperator, DEFAULT_DENSE_LEVEL_CAP,
};
use crate::tower::{gns_inner_unchecked, normalized_trace, random_element_with, AlgebraElement, ElementKind};

/// Tolerance used for the identities that hold to rounding error only
/// (normalization bridge, family compatibility, exhaustion at `n = N`).
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    Dirichlet,
    Markov,
    Symmetry,
    Choi,
    Leibniz,
    Compatibility,
    NormalizationBridge,
    Convergence,
    Projection,
    Amplification,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Dirichlet,
        Suite::Markov,
        Suite::Symmetry,
        Suite::Choi,
        Suite::Leibniz,
        Suite::Compatibility,
        Suite::NormalizationBridge,
        Suite::Convergence,
        Suite::Projection,
        Suite::Amplification,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Dirichlet => "dirichlet",
            Suite::Markov => "markov",
            Suite::Symmetry => "symmetry",
            Suite::Choi => "choi",
            Suite::Leibniz => "leibniz",
            Suite::Compatibility => "compatibility",
            Suite::NormalizationBridge => "normalization-bridge",
            Suite::Convergence => "convergence",
            Suite::Projection => "projection",
            Suite::Amplification => "amplification",
        }
    }

    /// Parses a comma-separated list of suite names or `all`.
    pub fn parse_list(spec: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if name == "all" {
                return Ok(Suite::ALL.to_vec());
            }
            let suite: Suite = name.parse()?;
            if !out.contains(&suite) {
                out.push(suite);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no suite selected".into()));
        }
        out.sort();
        Ok(out)
    }

    fn valid_names() -> String {
        let mut names: Vec<&str> = Suite::ALL.iter().map(Suite::name).collect();
        names.push("all");
        names.join(", ")
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite {
                name: s.to_string(),
                valid: Suite::valid_names(),
            })
    }
}

/// Configuration of a `verify` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Working level `N`.
    pub level: usize,
    pub suites: Vec<Suite>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Times at which semigroups are sampled.
    pub times: Vec<f64>,
    /// Highest level at which Choi matrices are formed.
    pub choi_max_level: usize,
    /// Certify the transpose map in place of `Φ_t` in the Choi suite.
    pub inject_transpose: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            level: 4,
            suites: Suite::ALL.to_vec(),
            samples: 200,
            seed: 7,
            tol: 1e-10,
            times: vec![0.1, 1.0, 10.0],
            choi_max_level: 3,
            inject_transpose: false,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.level < 1 {
            return Err(Error::Config("working level must be at least 1".into()));
        }
        crate::tower::dim_of(self.level)?;
        if self.samples < 1 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Config(format!("tolerance must be nonnegative, got {}", self.tol)));
        }
        check_time_grid(&self.times)?;
        if self.choi_max_level > DEFAULT_DENSE_LEVEL_CAP {
            return Err(Error::Config(format!(
                "choi_max_level {} exceeds the dense cap {DEFAULT_DENSE_LEVEL_CAP}",
                self.choi_max_level
            )));
        }
        Ok(())
    }

    /// Seed for one (suite, level) cell; every report records the seed it
    /// actually used.
    pub fn cell_seed(&self, suite: Suite, level: usize) -> u64 {
        let idx = Suite::ALL.iter().position(|s| *s == suite).unwrap_or(0) as u64;
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(idx * 1_000 + level as u64)
    }
}

fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("time grid is empty".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Config("time grid must be nonnegative and finite".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("time grid must be ascending".into()));
    }
    Ok(())
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_time_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("invalid time grid {spec:?}: {what}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let times = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop"));
        }
        let (start, step, stop) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if step.is_nan() || step <= 0.0 || !stop.is_finite() || stop < start {
            return Err(bad("step must be positive and stop ≥ start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',').map(number).collect::<Result<Vec<_>>>()?
    };
    check_time_grid(&times)?;
    Ok(times)
}

/// One row of the convergence table for `E_n(a) = E(P_n a) → E(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `E_n(a) = E(P_n a)`.
    pub restricted_energy: f64,
    /// `E(Q_n a)`.
    pub tail_energy: f64,
    /// `||Q_n a||₂²`.
    pub tail_norm_sq: f64,
    /// `|E_n(a)^{1/2} − E(a)^{1/2}|`.
    pub sqrt_gap: f64,
}

impl ConvergenceRow {
    /// Slack in `|√E_n − √E| ≤ √E(Q_n a)`.
    pub fn triangle_margin(&self) -> f64 {
        self.tail_energy.max(0.0).sqrt() - self.sqrt_gap
    }

    /// Slack in `E(Q_n a) ≤ ||Δ|| ||Q_n a||₂²`.
    pub fn bounded_margin(&self, operator_norm: f64) -> f64 {
        operator_norm * self.tail_norm_sq - self.tail_energy
    }
}

/// Rows `n = 1..=N` for `a` at the form's level `N`.
pub fn converge_table(form: &QuadraticForm, a: &AlgebraElement) -> Result<Vec<ConvergenceRow>> {
    let top = form.level();
    if a.level() != top {
        return Err(Error::LevelMismatch {
            expected: top,
            found: a.level(),
        });
    }
    let full = form.eval(a)?;
    (1..=top)
        .map(|n| {
            let restricted_energy = form.eval(&project_p(a, n)?)?;
            let tail = project_q(a, n)?;
            Ok(ConvergenceRow {
                n,
                restricted_energy,
                tail_energy: form.eval(&tail)?,
                tail_norm_sq: tail.norm2_sq(),
                sqrt_gap: (restricted_energy.max(0.0).sqrt() - full.max(0.0).sqrt()).abs(),
            })
        })
        .collect()
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One sample of a semigroup trajectory `t ↦ Φ_t(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub l2_norm: f64,
    /// `⟨ΔΦ_t(a), Φ_t(a)⟩₂`.
    pub energy: f64,
    /// Extremes of the spectrum of the Hermitian part of `Φ_t(a)`.
    pub min_eig: f64,
    pub max_eig: f64,
}

pub fn evolve_trajectory(
    generator: &SuperOperator,
    a: &AlgebraElement,
    times: &[f64],
) -> Result<Vec<TrajectoryRow>> {
    check_time_grid(times)?;
    let semigroup = Semigroup::new(generator)?;
    times
        .iter()
        .map(|&t| {
            let x = semigroup.apply(t, a)?;
            let tr = normalized_trace(&x);
            let spectrum = x.eigenvalues();
            Ok(TrajectoryRow {
                t,
                trace_re: tr.re,
                trace_im: tr.im,
                l2_norm: x.norm2(),
                energy: gns_inner_unchecked(&generator.apply(&x)?, &x).re,
                min_eig: spectrum[0],
                max_eig: spectrum[spectrum.len() - 1],
            })
        })
        .collect()
}

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the selected suites at every level `1..=N` they apply to.
pub fn run_suite(cfg: &RunConfig) -> Result<Vec<PropertyReport>> {
    cfg.validate()?;
    let mut reports = Vec::new();
    for &suite in &cfg.suites {
        reports.extend(run_one(cfg, suite)?);
    }
    Ok(reports)
}

fn run_one(cfg: &RunConfig, suite: Suite) -> Result<Vec<PropertyReport>> {
    let top = cfg.level;
    let mut out = Vec::new();
    match suite {
        Suite::Dirichlet => {
            for level in 1..=top {
                let form = QuadraticForm::diagonal(level)?;
                out.push(dirichlet_check(&form, cfg.samples, cfg.cell_seed(suite, level), cfg.tol)?);
            }
        }
        Suite::Markov => {
            for level in 1..=top {
                let gen = SuperOperator::diagonal_complement(level)?;
                out.push(markov_check(&gen, &cfg.times, cfg.samples, cfg.cell_seed(suite, level), cfg.tol)?);
            }
        }
        Suite::Symmetry => {
            for level in 1..=top {
                let gen = SuperOperator::diagonal_complement(level)?;
                out.push(symmetry_conservativity_check(
                    &gen,
                    &cfg.times,
                    cfg.samples,
                    cfg.cell_seed(suite, level),
                    cfg.tol,
                )?);
            }
        }
        Suite::Choi => {
            for level in 1..=top.min(cfg.choi_max_level) {
                out.extend(choi_reports(cfg, level)?);
            }
        }
        Suite::Leibniz => {
            for level in 1..=top {
                out.push(leibniz_report(cfg, level)?);
            }
        }
        Suite::Compatibility => out.push(compatibility_report(cfg)?),
        Suite::NormalizationBridge => {
            for level in 1..=top {
                out.push(bridge_report(cfg, level)?);
            }
        }
        Suite::Convergence => out.push(convergence_report(cfg)?),
        Suite::Projection => {
            for level in 0..=top {
                out.push(projection_report(cfg, level)?);
            }
        }
        Suite::Amplification => {
            for level in 1..=top.min(3) {
                for k in [2, 3] {
                    let form = amplified_form(&QuadraticForm::diagonal(level)?, k)?;
                    let mut r = dirichlet_check(
                        &form,
                        cfg.samples,
                        cfg.cell_seed(suite, level * 10 + k),
                        cfg.tol,
                    )?;
                    r.suite = format!("amplification-k{k}");
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

fn choi_reports(cfg: &RunConfig, level: usize) -> Result<Vec<PropertyReport>> {
    let seed = cfg.cell_seed(Suite::Choi, level);
    let mut choi = PropertyReport::new("choi", level, seed, cfg.tol);
    let gen = SuperOperator::diagonal_complement(level)?;
    let semigroup = Semigroup::new(&gen)?;
    for &t in &cfg.times {
        let map = if cfg.inject_transpose {
            SuperOperator::transpose(level)?
        } else {
            semigroup.map_at(t)?
        };
        let cert = certify_complete_positivity(&map, cfg.tol)?;
        choi.record([cert.min_eigenvalue, -cert.hermitian_deviation]);
    }
    let mut spot = PropertyReport::new("cp-spot", level, seed, cfg.tol);
    for k in 1..=3 {
        let map = semigroup.map_at(cfg.times[cfg.times.len() / 2])?;
        spot.merge(&cp_spot_check(&map, k, cfg.samples.min(50), seed + k as u64, cfg.tol)?);
    }
    Ok(vec![choi, spot])
}

fn leibniz_report(cfg: &RunConfig, n: usize) -> Result<PropertyReport> {
    let seed = cfg.cell_seed(Suite::Leibniz, n);
    let mut report = PropertyReport::new("leibniz", n, seed, cfg.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.samples {
        let a = random_element_with(n, ElementKind::General, &mut rng)?;
        let b = random_element_with(n, ElementKind::General, &mut rng)?;
        let lhs = derive(&(&a * &b), n)?;
        let rhs = bimodule_right(&derive(&a, n)?, &b)?.checked_add(&bimodule_left(&a, &derive(&b, n)?)?)?;
        let ambient = random_element_with(cfg.level, ElementKind::General, &mut rng)?;
        let energy_gap = derivation_energy(&ambient, n)? - commutator_form_eval(&ambient, n)?;
        report.record([
            PropertyReport::equality_margin(lhs.max_abs_diff(&rhs)),
            PropertyReport::equality_margin(energy_gap),
        ]);
    }
    Ok(report)
}

fn compatibility_report(cfg: &RunConfig) -> Result<PropertyReport> {
    let top = cfg.level;
    let tol = cfg.tol.min(EXACT_TOL);
    let seed = cfg.cell_seed(Suite::Compatibility, top);
    let mut report = PropertyReport::new("compatibility", top, seed, tol);
    let family = CompatibleFamily::commutator(top)?;
    for n in 1..top {
        let worst = family.check_compatibility(n + 1, tol);
        report.record_one(match worst {
            Ok(w) => PropertyReport::equality_margin(w),
            Err(Error::IncompatibleFamily { lower, upper, .. }) => {
                PropertyReport::equality_margin(lower - upper)
            }
            Err(e) => return Err(e),
        });
    }

    let recovered = build_from_family(&family, top, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recovery_err: f64 = match &recovered {
        Ok(_) => 0.0,
        Err(_) => f64::INFINITY,
    };
    if let Ok(form) = &recovered {
        for _ in 0..cfg.samples.min(50) {
            let a = random_element_with(top, ElementKind::General, &mut rng)?;
            recovery_err = recovery_err.max((form.eval(&a)? - commutator_form_eval(&a, top)?).abs());
        }
    }
    report.record_one(PropertyReport::equality_margin(recovery_err));

    if top >= 2 {
        let doubled = family.at(top - 1).expect("level in range").scaled(2.0)?;
        let perturbed = family.clone().with_form(doubled)?;
        let rejected = matches!(
            build_from_family(&perturbed, top, tol),
            Err(Error::IncompatibleFamily { .. })
        );
        report.record_one(if rejected { 0.0 } else { f64::NEG_INFINITY });
    }
    Ok(report)
}

fn bridge_report(cfg: &RunConfig, n: usize) -> Result<PropertyReport> {
    let tol = cfg.tol.min(EXACT_TOL);
    let seed = cfg.cell_seed(Suite::NormalizationBridge, n);
    let mut report = PropertyReport::new("normalization-bridge", n, seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diagonal = QuadraticForm::diagonal(n)?;
    for _ in 0..cfg.samples {
        let a = random_element_with(cfg.level, ElementKind::General, &mut rng)?;
        let lhs = commutator_form_eval(&a, n)?;
        let rhs = 2.0 * diagonal.eval(&cond_expect(&a, n)?)?;
        report.record_one(PropertyReport::equality_margin(lhs - rhs));
    }
    if n <= cfg.choi_max_level.max(4) {
        report.record_one(PropertyReport::equality_margin(generator_identity_gap(n)?));
    }
    Ok(report)
}

/// Largest entry of `dense(Σ_j [p_j, [p_j, ·]]) − 2·dense(I − B)`.
pub fn generator_identity_gap(level: usize) -> Result<f64> {
    let lhs = SuperOperator::diagonal_double_commutator(level)?.dense_matrix(DEFAULT_DENSE_LEVEL_CAP)?;
    let rhs = SuperOperator::diagonal_complement(level)?.dense_matrix(DEFAULT_DENSE_LEVEL_CAP)?;
    Ok(linalg::max_abs(&(lhs - rhs * num_complex::Complex64::new(2.0, 0.0))))
}

fn convergence_report(cfg: &RunConfig) -> Result<PropertyReport> {
    let top = cfg.level;
    let seed = cfg.cell_seed(Suite::Convergence, top);
    let mut report = PropertyReport::new("convergence", top, seed, cfg.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = QuadraticForm::diagonal(top)?;
    let norm = form.operator_norm()?;
    for _ in 0..cfg.samples {
        let a = random_element_with(top, ElementKind::General, &mut rng)?;
        let rows = converge_table(&form, &a)?;
        let mut margins = Vec::with_capacity(2 * rows.len() + 1);
        for row in &rows {
            margins.push(row.triangle_margin());
            margins.push(row.bounded_margin(norm));
        }
        let last = rows.last().expect("top ≥ 1");
        // The tail vanishes at n = N up to rounding.
        let residual = last.tail_energy.abs();
        margins.push(if residual <= EXACT_TOL { 0.0 } else { -(residual + cfg.tol) });
        report.record(margins);
    }
    Ok(report)
}

fn projection_report(cfg: &RunConfig, n: usize) -> Result<PropertyReport> {
    let top = cfg.level;
    let seed = cfg.cell_seed(Suite::Projection, n);
    let mut report = PropertyReport::new("projection", n, seed, cfg.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.samples {
        let a = random_element_with(top, ElementKind::General, &mut rng)?;
        let b = random_element_with(top, ElementKind::General, &mut rng)?;
        let pa = project_p(&a, n)?;
        let idempotent = project_p(&pa, n)?.max_abs_diff(&pa);
        let self_adjoint =
            (gns_inner_unchecked(&pa, &b) - gns_inner_unchecked(&a, &project_p(&b, n)?)).norm();
        let orthogonal = gns_inner_unchecked(&pa, &project_q(&a, n)?).norm();
        let mut margins = vec![
            PropertyReport::equality_margin(idempotent),
            PropertyReport::equality_margin(self_adjoint),
            PropertyReport::equality_margin(orthogonal),
        ];
        for m in 0..=top {
            let lhs = project_p(&project_p(&a, n)?, m)?;
            let rhs = project_p(&a, m.min(n))?;
            margins.push(PropertyReport::equality_margin(lhs.max_abs_diff(&rhs)));
        }
        if n == top {
            margins.push(PropertyReport::equality_margin(pa.max_abs_diff(&a)));
        }
        report.record(margins);
    }
    Ok(report)
}

/// Writes `reports.json` and `summary.csv` into `dir`.
pub fn write_reports(reports: &[PropertyReport], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(reports)?;
    json.push('\n');
    fs::write(dir.join("reports.json"), json)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn any_failures(reports: &[PropertyReport]) -> bool {
    reports.iter().any(|r| r.failures > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{embed, random_element};

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::parse_list("all").unwrap().len(), Suite::ALL.len());
        assert_eq!(
            Suite::parse_list("markov, dirichlet,markov").unwrap(),
            vec![Suite::Dirichlet, Suite::Markov]
        );
        match Suite::parse_list("dirichlet,bogus") {
            Err(Error::UnknownSuite { name, valid }) => {
                assert_eq!(name, "bogus");
                assert!(valid.contains("normalization-bridge"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn time_grids() {
        assert_eq!(parse_time_grid("0:0.5:2").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_time_grid("0:0.1:2").unwrap().len(), 21);
        assert_eq!(parse_time_grid("0.1,1,10").unwrap(), vec![0.1, 1.0, 10.0]);
        assert!(parse_time_grid("1,0").is_err());
        assert!(parse_time_grid("-1:1:2").is_err());
        assert!(parse_time_grid("0:0:1").is_err());
        assert!(parse_time_grid("x").is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.samples = 0;
        assert!(cfg.validate().is_err());
        cfg = RunConfig {
            level: 0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = RunConfig {
            times: vec![1.0, 0.5],
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn converge_table_for_low_level_element() {
        let a = embed(&AlgebraElement::pauli_x(), 4).unwrap();
        let form = QuadraticForm::diagonal(4).unwrap();
        let rows = converge_table(&form, &a).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!((row.restricted_energy - 1.0).abs() < 1e-14);
            assert!(row.tail_energy.abs() < 1e-14);
            assert!(row.tail_norm_sq.abs() < 1e-14);
        }
    }

    #[test]
    fn converge_table_for_diagonal_element_is_zero() {
        let d: Vec<f64> = (0..16).map(|i| i as f64 - 3.5).collect();
        let a = AlgebraElement::real_diagonal(&d).unwrap();
        let rows = converge_table(&QuadraticForm::diagonal(4).unwrap(), &a).unwrap();
        for row in rows {
            assert_eq!(row.restricted_energy, 0.0);
            assert_eq!(row.tail_energy, 0.0);
            assert_eq!(row.sqrt_gap, 0.0);
        }
    }

    #[test]
    fn converge_table_chain_on_random_element() {
        let a = random_element(4, ElementKind::General, 1).unwrap();
        let form = QuadraticForm::diagonal(4).unwrap();
        let rows = converge_table(&form, &a).unwrap();
        for row in &rows {
            assert!(row.triangle_margin() >= -1e-10, "{row:?}");
            assert!(row.bounded_margin(1.0) >= -1e-10, "{row:?}");
        }
        assert!(rows[3].tail_energy.abs() < 1e-12);
        assert!((rows[3].restricted_energy - form.eval(&a).unwrap()).abs() < 1e-12);
        assert!(converge_table(&form, &random_element(3, ElementKind::General, 1).unwrap()).is_err());
    }

    #[test]
    fn csv_headers() {
        let rows = converge_table(
            &QuadraticForm::diagonal(2).unwrap(),
            &random_element(2, ElementKind::General, 2).unwrap(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_convergence_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,restricted_energy,tail_energy,tail_norm_sq,sqrt_gap\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn trajectory_of_pauli_x_decays() {
        let gen = SuperOperator::diagonal_complement(1).unwrap();
        let rows = evolve_trajectory(&gen, &AlgebraElement::pauli_x(), &[0.0, 1.0, 2.0]).unwrap();
        for row in &rows {
            assert!((row.l2_norm - (-row.t).exp()).abs() < 1e-14);
            assert!((row.energy - (-2.0 * row.t).exp()).abs() < 1e-14);
            assert_eq!(row.trace_re, 0.0);
        }
        let mut buf = Vec::new();
        write_trajectory_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("t,trace_re,trace_im,l2_norm,energy,min_eig,max_eig\n"));
    }

    #[test]
    fn small_full_run_passes() {
        let cfg = RunConfig {
            level: 2,
            samples: 5,
            ..RunConfig::default()
        };
        let reports = run_suite(&cfg).unwrap();
        assert!(!any_failures(&reports), "{reports:#?}");
        let names: Vec<&str> = reports.iter().map(|r| r.suite.as_str()).collect();
        for s in ["dirichlet", "markov", "symmetry", "choi", "cp-spot", "leibniz", "compatibility",
                  "normalization-bridge", "convergence", "projection", "amplification-k2", "amplification-k3"] {
            assert!(names.contains(&s), "missing {s}");
        }
    }

    #[test]
    fn injected_transpose_fails_choi() {
        let cfg = RunConfig {
            level: 1,
            samples: 2,
            suites: vec![Suite::Choi],
            inject_transpose: true,
            ..RunConfig::default()
        };
        let reports = run_suite(&cfg).unwrap();
        let choi = reports.iter().find(|r| r.suite == "choi").unwrap();
        assert_eq!(choi.failures, cfg.times.len());
        assert!((choi.worst_margin + 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_sample_run_is_well_formed() {
        let cfg = RunConfig {
            level: 1,
            samples: 1,
            suites: vec![Suite::Dirichlet],
            ..RunConfig::default()
        };
        let reports = run_suite(&cfg).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].samples, 1);
        assert!(reports[0].worst_margin.is_finite());
    }
}
