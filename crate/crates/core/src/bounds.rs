//! Two-sided bounds for the Bergman kernel, the Bergman metric and the Szegő
//! kernel at points of an approach path, the predicted boundary envelopes,
//! and log-log slope fitting over scans.
//!
//! Lower bounds come from explicit holomorphic candidates (`kappa >= 1/I_0`,
//! `I_0 <= ||phi||^2 / |phi(z)|^2`); upper bounds from the inscribed product
//! of balls `A_z`, whose Bergman kernel at the centre is `1 / Vol(A_z)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ApproachSpec, Direction, DomainDescriptor, ModelDomain, Point};
use crate::quadrature::{
    phi_norm_sq_upper, phi_surface_norm_sq_upper, psi_normal_norms_sq_upper, psi_tangential_norms_sq_upper,
    NormSettings, SurfaceOptions,
};

/// Minimum number of usable rows for [`slope_fit`].
pub const MIN_FIT_ROWS: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundSettings {
    pub norm: NormSettings,
    pub surface: SurfaceOptions,
}

/// `|phi(z)|^2` for `phi = t^n / (w_n - i Im z_n + t)^n` is `2^{-2n}`.
fn phi_at_center_sq(n: usize) -> f64 {
    0.25f64.powi(n as i32)
}

/// Certified lower bound of the Bergman kernel of `D ∩ U` at `z`.
pub fn kappa_lower<D: ModelDomain + ?Sized>(domain: &D, z: &Point, settings: &BoundSettings) -> Result<f64> {
    let norm = phi_norm_sq_upper(domain, z, &settings.norm)?;
    Ok(phi_at_center_sq(domain.total_dim()) / norm.value)
}

/// Certified upper bound `1 / Vol(A_z)` of the Bergman kernel of `D ∩ U` at `z`.
pub fn kappa_upper(domain: &DomainDescriptor, approach: &ApproachSpec, z: &Point) -> Result<f64> {
    Ok(domain.polydisc(approach, z)?.center_kernel())
}

/// Lower bound of the auxiliary Szegő kernel of the model piece at `z`, up
/// to the unknown localization constant.
pub fn szego_lower<D: ModelDomain + ?Sized>(domain: &D, z: &Point, settings: &BoundSettings) -> Result<f64> {
    let norm = phi_surface_norm_sq_upper(domain, z, &settings.norm, &settings.surface)?;
    Ok(phi_at_center_sq(domain.total_dim()) / norm.value)
}

/// `Re z_n * kappa_upper(z)`: the Szegő kernel is bounded by this up to an
/// unknown constant when the boundary is convex near the origin.
pub fn szego_upper_envelope(domain: &DomainDescriptor, approach: &ApproachSpec, z: &Point) -> Result<f64> {
    if !domain.convex() {
        return Err(Error::UnsupportedDomain("upper envelope requires convex flag".into()));
    }
    Ok(z.t() * kappa_upper(domain, approach, z)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricBounds {
    pub lower: f64,
    pub upper: f64,
    /// Upper bound of `I_1(z; xi)` implied by `lower = 1 / (kappa_upper I_1)`.
    pub i1_upper: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    /// Squared metric of `A_z` at its centre.
    pub polydisc_metric: f64,
}

/// Lower and upper bounds of the squared Bergman metric `B^2(z; xi)`.
///
/// Each nonzero component of `xi` (the normal coordinate and every block)
/// gets its own candidate. On the axis `z' = 0` the rotations of each block
/// decouple the components, so the per-component bounds add; off the axis
/// their mean is used.
pub fn metric_bounds(
    domain: &DomainDescriptor,
    approach: &ApproachSpec,
    z: &Point,
    xi: &Direction,
    settings: &BoundSettings,
) -> Result<MetricBounds> {
    xi.check_shape(domain)?;
    if xi.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let region = domain.polydisc(approach, z)?;
    let k_up = region.center_kernel();
    let k_low = kappa_lower(domain, z, settings)?;

    let mut parts = Vec::new();
    let xn = xi.normal.norm_sqr();
    if xn > 0.0 {
        let (psi1, psi2) = psi_normal_norms_sq_upper(domain, z, &settings.norm)?;
        let i1_unit = 4.0 * (psi1 + (2.0 * psi1).max(psi2));
        parts.push(xn / (k_up * i1_unit));
    }
    for (j, block) in xi.blocks.iter().enumerate() {
        let sq: f64 = block.iter().map(|c| c.norm_sqr()).sum();
        if sq == 0.0 {
            continue;
        }
        let (s1, s2) = psi_tangential_norms_sq_upper(domain, z, j, block, &settings.norm)?;
        parts.push(sq / (k_up * 2.0 * (s1 + s2)));
    }
    let on_axis = z.block_parts.iter().flatten().all(|c| c.norm_sqr() == 0.0);
    let sum: f64 = parts.iter().sum();
    let lower = if on_axis || parts.len() == 1 {
        sum
    } else {
        sum / parts.len() as f64
    };
    let polydisc_metric = region.center_metric(xi);
    Ok(MetricBounds {
        lower,
        upper: k_up / k_low * polydisc_metric,
        i1_upper: 1.0 / (k_up * lower),
        kappa_lower: k_low,
        kappa_upper: k_up,
        polydisc_metric,
    })
}

/// Which boundary envelope to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Envelope {
    /// `t^{-2} prod_j f_j^{-1}(t)^{-2 n_j}`.
    Kappa,
    /// `t^{-2}`.
    MetricNormal,
    /// `f_j^{-1}(t)^{-2}`.
    MetricBlock(usize),
    /// `t^{-1} prod_j f_j^{-1}(t)^{-2 n_j}`.
    Szego,
    /// `t^{-2} prod_j f_j^{-1}(t)^{-n_j}` with `n_j` the real block dimension.
    KappaExtended,
    /// `t^{-1} prod_j f_j^{-1}(t)^{-n_j}` with `n_j` the real block dimension.
    SzegoExtended,
}

/// Predicted growth of the bounds at height `t`, without constants.
///
/// A complex block of dimension `n_j` has real dimension `2 n_j`, so every
/// variant uses the real dimension reported by `radial_blocks`.
pub fn predicted_envelope<D: ModelDomain + ?Sized>(domain: &D, t: f64, which: Envelope) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::range("t", t, "(0, inf)"));
    }
    let blocks = domain.radial_blocks();
    let product = || -> Result<f64> {
        let mut p = 1.0;
        for b in &blocks {
            p *= b.profile.inverse(t)?.powi(-(b.real_dim as i32));
        }
        Ok(p)
    };
    match which {
        Envelope::Kappa | Envelope::KappaExtended => Ok(product()? / t / t),
        Envelope::Szego | Envelope::SzegoExtended => Ok(product()? / t),
        Envelope::MetricNormal => Ok(1.0 / (t * t)),
        Envelope::MetricBlock(j) => {
            let b = blocks
                .get(j)
                .ok_or_else(|| Error::Input(format!("block index {j} out of range")))?;
            Ok(b.profile.inverse(t)?.powi(-2))
        }
    }
}

/// `sum_j |xi^j|^2 / f_j^{-1}(t)^2 + |xi_n|^2 / t^2`.
pub fn metric_envelope(domain: &DomainDescriptor, t: f64, xi: &Direction) -> Result<f64> {
    xi.check_shape(domain)?;
    let mut total = xi.normal.norm_sqr() * predicted_envelope(domain, t, Envelope::MetricNormal)?;
    for (j, block) in xi.blocks.iter().enumerate() {
        let sq: f64 = block.iter().map(|c| c.norm_sqr()).sum();
        if sq > 0.0 {
            total += sq * predicted_envelope(domain, t, Envelope::MetricBlock(j))?;
        }
    }
    Ok(total)
}

/// All bounds and envelopes at one point of the approach path.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub t: f64,
    pub point: Point,
    pub kappa_lower: f64,
    pub kappa_upper: Option<f64>,
    pub metric_lower: Option<f64>,
    pub metric_upper: Option<f64>,
    pub szego_lower: f64,
    pub szego_upper_envelope: Option<f64>,
    pub envelope_kappa: f64,
    pub envelope_metric: Option<f64>,
    pub envelope_szego: f64,
    pub i0_upper: f64,
    pub i1_upper: Option<f64>,
}

/// Evaluates every bound at the approach-path point of height `t`.
pub fn bound_report(
    domain: &DomainDescriptor,
    approach: &ApproachSpec,
    t: f64,
    xi: Option<&Direction>,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    let z = domain.approach_point(approach, t)?;
    let k_low = kappa_lower(domain, &z, settings)?;
    let k_up = kappa_upper(domain, approach, &z)?;
    let metric = xi.map(|xi| metric_bounds(domain, approach, &z, xi, settings)).transpose()?;
    let s_low = szego_lower(domain, &z, settings)?;
    let s_up = if domain.convex() {
        Some(szego_upper_envelope(domain, approach, &z)?)
    } else {
        None
    };
    Ok(BoundReport {
        t,
        kappa_lower: k_low,
        kappa_upper: Some(k_up),
        metric_lower: metric.as_ref().map(|m| m.lower),
        metric_upper: metric.as_ref().map(|m| m.upper),
        szego_lower: s_low,
        szego_upper_envelope: s_up,
        envelope_kappa: predicted_envelope(domain, t, Envelope::Kappa)?,
        envelope_metric: xi.map(|xi| metric_envelope(domain, t, xi)).transpose()?,
        envelope_szego: predicted_envelope(domain, t, Envelope::Szego)?,
        i0_upper: 1.0 / k_low,
        i1_upper: metric.as_ref().map(|m| m.i1_upper),
        point: z,
    })
}

/// Lower bounds on a domain decoupled over real coordinate blocks, at the
/// axis point of height `t`.
pub fn extended_report<D: ModelDomain + ?Sized>(
    domain: &D,
    z: Point,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    let t = z.t();
    let k_low = kappa_lower(domain, &z, settings)?;
    Ok(BoundReport {
        t,
        kappa_lower: k_low,
        kappa_upper: None,
        metric_lower: None,
        metric_upper: None,
        szego_lower: szego_lower(domain, &z, settings)?,
        szego_upper_envelope: None,
        envelope_kappa: predicted_envelope(domain, t, Envelope::KappaExtended)?,
        envelope_metric: None,
        envelope_szego: predicted_envelope(domain, t, Envelope::SzegoExtended)?,
        i0_upper: 1.0 / k_low,
        i1_upper: None,
        point: z,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub t: f64,
    pub report: Option<BoundReport>,
    /// `"ok"` or the error that prevented the row from being computed.
    pub status: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanMetadata {
    pub config_hash: Option<String>,
    pub approach: String,
    pub seed: Option<u64>,
    pub rel_tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub metadata: ScanMetadata,
}

/// Column names of the scan table, in output order (after `t`).
pub const COLUMNS: [&str; 11] = [
    "kappa_lower",
    "kappa_upper",
    "env_kappa",
    "ratio_kl",
    "ratio_ku",
    "metric_lower",
    "metric_upper",
    "env_metric",
    "szego_lower",
    "szego_upper_env",
    "env_szego",
];

impl BoundReport {
    /// Value of a named scan column; `None` if the column was not computed.
    pub fn column(&self, name: &str) -> Result<Option<f64>> {
        Ok(match name {
            "t" => Some(self.t),
            "kappa_lower" => Some(self.kappa_lower),
            "kappa_upper" => self.kappa_upper,
            "env_kappa" => Some(self.envelope_kappa),
            "ratio_kl" => Some(self.kappa_lower / self.envelope_kappa),
            "ratio_ku" => self.kappa_upper.map(|k| k / self.envelope_kappa),
            "metric_lower" => self.metric_lower,
            "metric_upper" => self.metric_upper,
            "env_metric" => self.envelope_metric,
            "szego_lower" => Some(self.szego_lower),
            "szego_upper_env" => self.szego_upper_envelope,
            "env_szego" => Some(self.envelope_szego),
            _ => return Err(Error::Input(format!("unknown column `{name}`"))),
        })
    }
}

impl ScanTable {
    /// `(t, value)` for every successful row where the column is present.
    pub fn column(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            if let Some(r) = &row.report {
                if let Some(v) = r.column(name)? {
                    out.push((row.t, v));
                }
            }
        }
        Ok(out)
    }

    pub fn ok_rows(&self) -> impl Iterator<Item = &BoundReport> {
        self.rows.iter().filter_map(|r| r.report.as_ref())
    }

    /// `max / min` of a column over the successful rows.
    pub fn band(&self, name: &str) -> Result<f64> {
        let values: Vec<f64> = self.column(name)?.into_iter().map(|(_, v)| v).collect();
        band(&values)
    }
}

/// `max / min` of positive values.
pub fn band(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Input("band of an empty column".into()));
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi / lo)
}

fn check_grid(t_grid: &[f64], t0: f64) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Input("empty t-grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Input("t-grid must be strictly decreasing".into()));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= t0)) {
        return Err(Error::range("t", t, format!("(0, t0 = {t0}]")));
    }
    Ok(())
}

fn collect_rows<F>(t_grid: &[f64], eval: F) -> Vec<ScanRow>
where
    F: Fn(f64) -> Result<BoundReport> + Sync,
{
    t_grid
        .par_iter()
        .map(|&t| match eval(t) {
            Ok(report) => ScanRow {
                t,
                report: Some(report),
                status: "ok".into(),
            },
            Err(e) => ScanRow {
                t,
                report: None,
                status: format!("error: {e}"),
            },
        })
        .collect()
}

/// One [`BoundReport`] per grid height; failing rows keep their error.
pub fn ratio_scan(
    domain: &DomainDescriptor,
    approach: &ApproachSpec,
    t_grid: &[f64],
    xi: Option<&Direction>,
    settings: &BoundSettings,
) -> Result<ScanTable> {
    check_grid(t_grid, domain.t0())?;
    if let Some(xi) = xi {
        xi.check_shape(domain)?;
        if xi.is_zero() {
            return Err(Error::ZeroDirection);
        }
    }
    let rows = collect_rows(t_grid, |t| bound_report(domain, approach, t, xi, settings));
    Ok(ScanTable {
        rows,
        metadata: ScanMetadata {
            approach: format!("{approach:?}"),
            rel_tol: settings.norm.rel_tol,
            ..ScanMetadata::default()
        },
    })
}

/// Lower-bound scan along the axis of a domain decoupled over real blocks.
pub fn extended_scan(
    domain: &crate::geometry::ExtendedDomainDescriptor,
    t_grid: &[f64],
    settings: &BoundSettings,
) -> Result<ScanTable> {
    check_grid(t_grid, domain.t0())?;
    let rows = collect_rows(t_grid, |t| extended_report(domain, domain.axis_point(t), settings));
    Ok(ScanTable {
        rows,
        metadata: ScanMetadata {
            approach: "axis".into(),
            rel_tol: settings.norm.rel_tol,
            ..ScanMetadata::default()
        },
    })
}

/// `n` geometrically spaced heights from `t_max` down to `t_min`.
pub fn geometric_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max) {
        return Err(Error::Input(format!("need 0 < t_min < t_max, got {t_min}, {t_max}")));
    }
    if n < 2 {
        return Err(Error::range("points", n as f64, "[2, inf)"));
    }
    let (a, b) = (t_max.ln(), t_min.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => t_max,
            i if i == n - 1 => t_min,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, max |residual|)`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of `log v` from the fitted line.
    pub residual: f64,
    pub rows: usize,
}

/// Least-squares fit of `log v` against `log t`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::Input(format!("a slope needs at least 2 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::Input(format!("log-log fit needs positive finite data, got ({}, {})", p.0, p.1)));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let (slope, intercept, residual) = least_squares(&logs);
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
        rows: points.len(),
    })
}

/// Slope of `log(column)` against `log(t)` over the successful rows.
pub fn slope_fit(table: &ScanTable, column: &str) -> Result<SlopeFit> {
    let points = table.column(column)?;
    if points.len() < MIN_FIT_ROWS {
        return Err(Error::Input(format!(
            "column `{column}` has {} usable rows, need at least {MIN_FIT_ROWS}",
            points.len()
        )));
    }
    fit_log_log(&points)
}
