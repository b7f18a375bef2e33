//! Command dispatch: each command computes a table, fits slopes, and records
//! one verdict per enabled invariant.

use std::fmt;

use num_complex::Complex64;
use serde_json::json;

use super::config::RunConfig;
use super::report::{scan_csv, table_csv, RunOutput, SlopeEntry, Summary};
use crate::bounds::{self, band, extended_scan, fit_log_log, ratio_scan, slope_fit, ScanTable};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::oracle::{
    exact_kappa_reference, transformation_check, transformation_check_gram, Dictionary, ReferenceDomain,
    SampleSet, DEFAULT_BATCHES,
};
use crate::profiles::{classify, lemma31_ratio, ProfileSpec, TypeReport};
use crate::quadrature::prop32_ratio;

/// Slope tolerance of the rate invariants.
pub const SLOPE_TOL: f64 = 0.05;
/// Largest admissible `max/min` of an envelope-normalized column.
pub const BAND_MAX: f64 = 100.0;
/// Envelope fits with a larger residual are not power laws; their slope
/// invariants are disabled and only bands are checked.
pub const POWER_LAW_RESIDUAL: f64 = 1e-6;
/// Relative tolerance of the oracle agreement checks.
pub const ORACLE_RTOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    KernelScan,
    MetricScan,
    SzegoScan,
    ProfileCheck,
    IntegralCheck,
    OracleValidate,
    ExtendedScan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KernelScan => "kernel-scan",
            Command::MetricScan => "metric-scan",
            Command::SzegoScan => "szego-scan",
            Command::ProfileCheck => "profile-check",
            Command::IntegralCheck => "integral-check",
            Command::OracleValidate => "oracle-validate",
            Command::ExtendedScan => "extended-scan",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

struct Log(Vec<String>);

impl Log {
    fn line(&mut self, s: impl Into<String>) {
        let s = s.into();
        log::info!("{s}");
        self.0.push(s);
    }
}

/// Runs `command` on a resolved config.
pub fn run_scan(config: &RunConfig, command: Command) -> Result<RunOutput> {
    let mut summary = Summary::new(command.name(), config)?;
    let mut log = Log(Vec::new());
    log.line(format!("{command} config_hash={}", summary.config_hash));
    let csv = match command {
        Command::KernelScan => {
            let table = scan(config, config.direction()?)?;
            scan_verdicts(&table, &mut summary, &[("kappa_lower", "env_kappa"), ("kappa_upper", "env_kappa")])?;
            sandwich(&table, &mut summary, "kappa_lower", "kappa_upper")?;
            let quotient: Vec<f64> = table
                .ok_rows()
                .filter_map(|r| r.kappa_upper.map(|u| u / r.kappa_lower))
                .collect();
            if !quotient.is_empty() {
                let b = band(&quotient)?;
                summary.bands.insert("kappa_upper/kappa_lower".into(), b);
                summary.verdict("band_kappa_upper_over_lower", b <= BAND_MAX, format!("{b:.4} <= {BAND_MAX}"));
            }
            scan_csv(&table)?
        }
        Command::MetricScan => {
            let xi = config.direction()?.map_or_else(|| Ok(Direction::normal(&config.domain()?)), Ok::<_, Error>)?;
            let table = scan(config, Some(xi))?;
            scan_verdicts(&table, &mut summary, &[("metric_lower", "env_metric"), ("metric_upper", "env_metric")])?;
            sandwich(&table, &mut summary, "metric_lower", "metric_upper")?;
            scan_csv(&table)?
        }
        Command::SzegoScan => {
            if !config.convex {
                return Err(Error::UnsupportedDomain("upper envelope requires convex flag".into()));
            }
            let table = scan(config, config.direction()?)?;
            scan_verdicts(&table, &mut summary, &[("szego_lower", "env_szego"), ("szego_upper_env", "env_szego")])?;
            summary
                .notes
                .push("szego_upper_env carries an unknown multiplicative constant; it is compared by slope only".into());
            scan_csv(&table)?
        }
        Command::ExtendedScan => {
            if !config.extended {
                return Err(Error::config("extended", "extended-scan needs extended = true"));
            }
            let domain = config.extended_domain()?;
            let table = extended_scan(&domain, &config.grid.heights()?, &config.settings())?;
            scan_verdicts(&table, &mut summary, &[("kappa_lower", "env_kappa")])?;
            scan_csv(&table)?
        }
        Command::ProfileCheck => profile_check(config, &mut summary, &mut log)?,
        Command::IntegralCheck => integral_check(config, &mut summary)?,
        Command::OracleValidate => oracle_validate(config, &mut summary, &mut log)?,
    };
    summary.notes.push(
        "lower bounds refer to the truncated model piece; the localization constant relating them to the full domain is unknown"
            .into(),
    );
    for (name, v) in &summary.verdicts {
        log.line(format!("{name}: {:?} ({})", v.status, v.detail));
    }
    log.line(format!("all_pass={}", summary.all_pass()));
    Ok(RunOutput {
        csv,
        summary,
        log: log.0,
    })
}

fn scan(config: &RunConfig, xi: Option<Direction>) -> Result<ScanTable> {
    let domain = config.domain()?;
    let mut table = ratio_scan(&domain, &config.approach()?, &config.grid.heights()?, xi.as_ref(), &config.settings())?;
    table.metadata.seed = Some(config.seed);
    Ok(table)
}

/// Row health, slope agreement with the envelope and envelope bands.
fn scan_verdicts(table: &ScanTable, summary: &mut Summary, pairs: &[(&str, &str)]) -> Result<()> {
    summary.rows = table.rows.len();
    summary.error_rows = table.rows.iter().filter(|r| r.status != "ok").count();
    summary.verdict(
        "rows_ok",
        summary.error_rows == 0,
        format!("{} of {} rows failed", summary.error_rows, summary.rows),
    );
    for &(col, env) in pairs {
        let values = table.column(col)?;
        let envelope = table.column(env)?;
        if values.len() < bounds::MIN_FIT_ROWS {
            summary.verdict(&format!("slope_{col}"), false, format!("only {} usable rows", values.len()));
            continue;
        }
        let fit = slope_fit(table, col)?;
        let env_fit = fit_log_log(&envelope)?;
        let power_law = env_fit.residual <= POWER_LAW_RESIDUAL;
        summary.slopes.insert(
            col.to_string(),
            SlopeEntry {
                slope: fit.slope,
                residual: fit.residual,
                predicted: power_law.then_some(env_fit.slope),
            },
        );
        if power_law {
            let diff = (fit.slope - env_fit.slope).abs();
            summary.verdict(
                &format!("slope_{col}"),
                diff <= SLOPE_TOL,
                format!("slope {:.4} vs predicted {:.4}", fit.slope, env_fit.slope),
            );
        }
        let ratios: Vec<f64> = values.iter().zip(&envelope).map(|(v, e)| v.1 / e.1).collect();
        let b = band(&ratios)?;
        summary.bands.insert(format!("{col}/{env}"), b);
        summary.verdict(&format!("band_{col}"), b <= BAND_MAX, format!("{b:.4} <= {BAND_MAX}"));
    }
    Ok(())
}

fn sandwich(table: &ScanTable, summary: &mut Summary, lower: &str, upper: &str) -> Result<()> {
    let mut violations = 0;
    let mut checked = 0;
    for r in table.ok_rows() {
        if let (Some(lo), Some(hi)) = (r.column(lower)?, r.column(upper)?) {
            checked += 1;
            if lo > hi {
                violations += 1;
            }
        }
    }
    summary.verdict(
        &format!("sandwich_{lower}_{upper}"),
        violations == 0 && checked > 0,
        format!("{violations} violations in {checked} rows"),
    );
    Ok(())
}

fn profile_specs(config: &RunConfig) -> Vec<ProfileSpec> {
    let mut specs: Vec<ProfileSpec> = if config.extended {
        config.extended_blocks.iter().map(|b| b.profile).collect()
    } else {
        config.blocks.iter().map(|b| b.profile).collect()
    };
    specs.dedup();
    specs
}

fn spec_label(spec: &ProfileSpec) -> String {
    match spec {
        ProfileSpec::Power { m, c } => format!("power(m={m},c={c})"),
        ProfileSpec::Expflat { p } => format!("expflat(p={p})"),
    }
}

fn profile_check(config: &RunConfig, summary: &mut Summary, log: &mut Log) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for spec in profile_specs(config) {
        let label = spec_label(&spec);
        let profile = spec.build()?;
        let report = classify(&profile);
        log.line(format!("{label}: {report:?}"));
        summary.values.insert(format!("{label}.type"), serde_json::to_value(&report).unwrap_or_default());
        match report {
            TypeReport::FiniteType { m_est, c_est } => {
                summary.verdict(&format!("{label}.classified"), true, format!("finite type m = {m_est:.6}, c = {c_est:.6}"));
                rows.push(vec![label.clone(), "finite".into(), String::new(), String::new(), String::new(), String::new(), "ok".into()]);
            }
            TypeReport::MildlyInfinite { doubling } => {
                summary.values.insert(format!("{label}.sigma"), json!(doubling.sigma));
                summary.verdict(&format!("{label}.doubling"), doubling.is_valid(), format!("sigma = {:.6}", doubling.sigma));
                let t_max = profile.lambda(doubling.range_end / doubling.sigma)?;
                for &m in &config.profile_check.m {
                    let c = lemma31_ratio(&profile, &doubling, m, t_max, config.profile_check.grid_size)?;
                    let bound = doubling.sigma.powf(m) - 1.0;
                    let pass = c <= bound + 1e-9;
                    summary.values.insert(format!("{label}.growth_constant[m={m}]"), json!(c));
                    summary.verdict(&format!("{label}.growth_bound[m={m}]"), pass, format!("{c:.9} <= sigma^m - 1 = {bound:.9}"));
                    rows.push(vec![
                        label.clone(),
                        "mildly_infinite".into(),
                        format!("{:e}", doubling.sigma),
                        format!("{m}"),
                        format!("{c:e}"),
                        format!("{bound:e}"),
                        if pass { "ok" } else { "fail" }.into(),
                    ]);
                }
            }
            TypeReport::Unknown => {
                summary.verdict(&format!("{label}.classified"), false, "neither finite type nor mildly infinite");
                rows.push(vec![label.clone(), "unknown".into(), String::new(), String::new(), String::new(), String::new(), "fail".into()]);
            }
        }
    }
    summary.rows = rows.len();
    table_csv(&["profile", "type", "sigma", "m", "growth_constant", "bound", "status"], &rows)
}

fn integral_check(config: &RunConfig, summary: &mut Summary) -> Result<Vec<u8>> {
    let pc = &config.profile_check;
    let grid = bounds::geometric_grid(pc.integral_t_min, pc.integral_t_max, config.grid.points)?;
    let mut rows = Vec::new();
    for spec in profile_specs(config) {
        let label = spec_label(&spec);
        let profile = spec.build()?;
        for &k in &pc.k {
            let mut values = Vec::new();
            for &t in &grid {
                match prop32_ratio(&profile, k, t) {
                    Ok(r) => {
                        values.push(r);
                        rows.push(vec![label.clone(), k.to_string(), format!("{t:e}"), format!("{r:e}"), "ok".into()]);
                    }
                    Err(e) => rows.push(vec![label.clone(), k.to_string(), format!("{t:e}"), String::new(), format!("error: {e}")]),
                }
            }
            let name = format!("{label}.radial_ratio[k={k}]");
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ok = values.len() == grid.len() && max.is_finite();
            summary.values.insert(format!("{name}.max"), json!(max));
            if ok {
                summary.bands.insert(name.clone(), band(&values)?);
            }
            summary.verdict(&format!("{name}.bounded"), ok, format!("max ratio {max:.6} over {} heights", values.len()));
        }
    }
    summary.rows = rows.len();
    summary.error_rows = rows.iter().filter(|r| r[4] != "ok").count();
    table_csv(&["profile", "k", "t", "ratio", "status"], &rows)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn oracle_validate(config: &RunConfig, summary: &mut Summary, log: &mut Log) -> Result<Vec<u8>> {
    let o = &config.oracle;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let record = |rows: &mut Vec<Vec<String>>, check: &str, t: Option<f64>, value: f64, reference: f64, se: f64, pass: bool| {
        rows.push(vec![
            check.to_string(),
            t.map(|t| format!("{t:e}")).unwrap_or_default(),
            format!("{value:e}"),
            format!("{reference:e}"),
            format!("{se:e}"),
            if pass { "ok" } else { "fail" }.into(),
        ]);
    };

    let cases: [(&str, ReferenceDomain, Vec<Complex64>); 4] = [
        ("disc_0", ReferenceDomain::Disc { r: 1.0 }, vec![c(0.0)]),
        ("disc_0.5", ReferenceDomain::Disc { r: 1.0 }, vec![c(0.5)]),
        ("bidisc_0", ReferenceDomain::Polydisc { radii: vec![1.0, 1.0] }, vec![c(0.0), c(0.0)]),
        ("ball2_0", ReferenceDomain::Ball { dim: 2, r: 1.0 }, vec![c(0.0), c(0.0)]),
    ];
    for (name, domain, z) in &cases {
        let dict = Dictionary::total_degree(z.len(), o.dmax);
        let samples = SampleSet::draw(domain, o.mc_samples, o.seed, DEFAULT_BATCHES)?;
        let est = samples.estimate(&dict, z, o.svd_cutoff)?;
        let exact = exact_kappa_reference(domain, z)?;
        let rel = (est.value - exact).abs() / exact;
        let pass = rel <= ORACLE_RTOL;
        log.line(format!("{name}: gram {:.6} exact {exact:.6} rel {rel:.2e}", est.value));
        summary.verdict(&format!("reference_{name}"), pass, format!("relative error {rel:.3e} <= {ORACLE_RTOL}"));
        record(&mut rows, &format!("reference_{name}"), None, est.value, exact, est.standard_error, pass);
    }

    // subspace refinement along the degree ordering, on fixed samples
    let disc = ReferenceDomain::Disc { r: 1.0 };
    let samples = SampleSet::draw(&disc, o.mc_samples, o.seed, DEFAULT_BATCHES)?;
    let full = Dictionary::total_degree(1, o.dmax);
    let mut prev = 0.0;
    let mut monotone = true;
    for size in 1..=full.size() {
        let v = samples.estimate(&full.prefix(size), &[c(0.5)], o.svd_cutoff)?.value;
        monotone &= v >= prev * (1.0 - 1e-12);
        prev = v;
    }
    summary.verdict("subspace_monotone", monotone, format!("{} nested dictionaries", full.size()));

    let closed = [
        transformation_check(&disc, &[2.0], &[c(0.0)])?,
        transformation_check(&ReferenceDomain::Polydisc { radii: vec![1.0, 1.0] }, &[2.0, 3.0], &[c(0.0), c(0.0)])?,
    ];
    let worst = closed.iter().map(|t| t.discrepancy).fold(0.0, f64::max);
    summary.verdict("transformation_closed_form", worst <= 1e-12, format!("max discrepancy {worst:e}"));
    let bidisc = ReferenceDomain::Polydisc { radii: vec![1.0, 1.0] };
    let z = [c(0.3), c(0.1)];
    let sampled = transformation_check_gram(&bidisc, &[2.0, 3.0], &z, &Dictionary::total_degree(2, o.dmax), o.mc_samples, o.seed)?;
    let pass = sampled.discrepancy <= 3.0 * sampled.standard_error;
    summary.verdict(
        "transformation_sampled",
        pass,
        format!("{:.3e} <= 3 * {:.3e}", sampled.discrepancy, sampled.standard_error),
    );
    record(&mut rows, "transformation_sampled", None, sampled.discrepancy, 0.0, sampled.standard_error, pass);

    if !config.extended {
        let domain = config.domain()?;
        let approach = config.approach()?;
        let dict = Dictionary::total_degree(domain.total_dim(), o.dmax);
        let samples = SampleSet::draw(&domain, o.mc_samples, o.seed, DEFAULT_BATCHES)?;
        let mut violations = 0;
        let grid = bounds::geometric_grid(o.cross_t_min, o.cross_t_max, o.cross_points)?;
        for &t in &grid {
            let z = domain.approach_point(&approach, t)?;
            let est = samples.estimate(&dict, &z.coords(), o.svd_cutoff)?;
            let upper = bounds::kappa_upper(&domain, &approach, &z)?;
            let pass = est.value <= upper * (1.0 + 3.0 * est.relative_error());
            violations += usize::from(!pass);
            log.line(format!("cross t={t:e}: gram {:.6e} kappa_upper {upper:.6e}", est.value));
            record(&mut rows, "cross_gram_vs_kappa_upper", Some(t), est.value, upper, est.standard_error, pass);
        }
        summary.verdict("cross_sandwich", violations == 0, format!("{violations} violations in {} heights", grid.len()));
    }
    summary.rows = rows.len();
    table_csv(&["check", "t", "value", "reference", "standard_error", "status"], &rows)
}
