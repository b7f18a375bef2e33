//! One-variable boundary profiles `f_j` and their calculus.
//!
//! A profile is a strictly increasing map `[0, cap] -> [0, inf)` with
//! `f(0) = 0`. Besides evaluation and inversion this module provides the
//! transform `Lambda_f(x) = -1/ln f(x)`, doubling-constant certificates for
//! `Lambda_f`, and a coarse finite-type / mildly-infinite-type classifier.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the bracketed inverse.
pub const INVERSE_RTOL: f64 = 1e-12;
/// Absolute tolerance of the bracketed inverse.
pub const INVERSE_ATOL: f64 = 1e-300;

/// Smallest doubling constant tried by [`doubling_constant`].
pub const SIGMA_MIN: f64 = 1.0 + 1.0 / 1_048_576.0;
/// Largest doubling constant tried by [`doubling_constant`].
pub const SIGMA_MAX: f64 = 1e6;

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ProfileKind {
    /// `c * x^m`, finite type of order `m`.
    Power { m: f64, c: f64 },
    /// `exp(-1/x^p)`, flat at the origin.
    ExpFlat { p: f64 },
    /// User supplied monotone map; only reachable from code.
    Custom(ProfileFn),
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Power { m, c } => write!(f, "Power {{ m: {m}, c: {c} }}"),
            ProfileKind::ExpFlat { p } => write!(f, "ExpFlat {{ p: {p} }}"),
            ProfileKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProfileFunction {
    kind: ProfileKind,
    domain_cap: f64,
}

/// Serialized form of a profile inside a run config.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Power {
        m: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Expflat {
        p: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn build(&self) -> Result<ProfileFunction> {
        match *self {
            ProfileSpec::Power { m, c } => ProfileFunction::power(m, c),
            ProfileSpec::Expflat { p } => ProfileFunction::exp_flat(p),
        }
    }
}

impl ProfileFunction {
    pub fn power(m: f64, c: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidProfile(format!("power exponent m = {m} must be positive")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidProfile(format!("power scale c = {c} must be positive")));
        }
        Ok(Self {
            kind: ProfileKind::Power { m, c },
            domain_cap: 1.0,
        })
    }

    pub fn exp_flat(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidProfile(format!("flatness exponent p = {p} must be positive")));
        }
        Ok(Self {
            kind: ProfileKind::ExpFlat { p },
            domain_cap: 1.0,
        })
    }

    /// Wraps an arbitrary map. It must vanish at 0 and be positive at the cap;
    /// monotonicity is only detected lazily, during inversion.
    pub fn custom<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let profile = Self {
            kind: ProfileKind::Custom(Arc::new(f)),
            domain_cap: 1.0,
        };
        profile.check_custom()?;
        Ok(profile)
    }

    pub fn with_domain_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::range("domain_cap", cap, "(0, inf)"));
        }
        self.domain_cap = cap;
        if matches!(self.kind, ProfileKind::Custom(_)) {
            self.check_custom()?;
        }
        Ok(self)
    }

    fn check_custom(&self) -> Result<()> {
        let f0 = self.raw(0.0);
        if f0 != 0.0 {
            return Err(Error::InvalidProfile(format!("custom profile has f(0) = {f0}, expected 0")));
        }
        let top = self.raw(self.domain_cap);
        if !(top.is_finite() && top > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "custom profile has f({}) = {top}, expected a positive finite value",
                self.domain_cap
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Power { m, c } => c * x.powf(*m),
            ProfileKind::ExpFlat { p } => {
                if x == 0.0 {
                    0.0
                } else {
                    (-x.powf(-p)).exp()
                }
            }
            ProfileKind::Custom(f) => f(x),
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < 0.0 || x > self.domain_cap {
            return Err(Error::range("x", x, format!("[0, {}]", self.domain_cap)));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.raw(x))
    }

    /// `ln f(x)` computed without underflow for the closed-form kinds.
    /// Returns `-inf` at `x = 0`.
    pub fn ln_eval(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if x == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match &self.kind {
            ProfileKind::Power { m, c } => c.ln() + m * x.ln(),
            ProfileKind::ExpFlat { p } => -x.powf(-p),
            ProfileKind::Custom(f) => f(x).ln(),
        })
    }

    /// `f'(x)`; central differences for custom profiles.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(match &self.kind {
            ProfileKind::Power { m, c } => {
                if x == 0.0 {
                    if *m > 1.0 {
                        0.0
                    } else if *m == 1.0 {
                        *c
                    } else {
                        f64::INFINITY
                    }
                } else {
                    c * m * x.powf(m - 1.0)
                }
            }
            ProfileKind::ExpFlat { p } => {
                if x == 0.0 {
                    0.0
                } else {
                    p * x.powf(-p - 1.0) * (-x.powf(-p)).exp()
                }
            }
            ProfileKind::Custom(f) => {
                let h = 1e-6 * self.domain_cap.max(x);
                let lo = (x - h).max(0.0);
                let hi = (x + h).min(self.domain_cap);
                (f(hi) - f(lo)) / (hi - lo)
            }
        })
    }

    /// Value at the top of the trusted range.
    pub fn max_value(&self) -> f64 {
        self.raw(self.domain_cap)
    }

    /// `f^{-1}(t)`, closed form where available and bracketed bisection on
    /// `[0, cap]` otherwise.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let top = self.max_value();
        if t.is_nan() || t < 0.0 || t > top {
            return Err(Error::range("t", t, format!("[0, f(cap) = {top}]")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let x = match &self.kind {
            ProfileKind::Power { m, c } => (t / c).powf(1.0 / m),
            ProfileKind::ExpFlat { p } => (1.0 / (1.0 / t).ln()).powf(1.0 / p),
            ProfileKind::Custom(f) => bisect_monotone(f.as_ref(), t, self.domain_cap, top)?,
        };
        Ok(x.min(self.domain_cap))
    }

    /// `Lambda_f(x) = -1/ln f(x)`, with `Lambda_f(0) = 0`.
    pub fn lambda(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        if let ProfileKind::ExpFlat { p } = self.kind {
            return Ok(x.powf(p));
        }
        let ln_f = self.ln_eval(x)?;
        if ln_f >= 0.0 || ln_f.is_nan() {
            return Err(Error::range("f(x)", ln_f.exp(), "[0, 1)"));
        }
        Ok(-1.0 / ln_f)
    }

    /// Inverse of [`lambda`](Self::lambda); uses `f^{-1}(exp(-1/t))` for
    /// non-closed-form kinds.
    pub fn lambda_inverse(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::range("t", t, "[0, inf)"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let out_of_range = || Error::range("t", t, format!("[0, Lambda_f(cap)] with cap = {}", self.domain_cap));
        match &self.kind {
            ProfileKind::ExpFlat { p } => {
                let x = t.powf(1.0 / p);
                if x > self.domain_cap {
                    return Err(out_of_range());
                }
                Ok(x)
            }
            ProfileKind::Power { m, c } => {
                let x = ((-1.0 / t - c.ln()) / m).exp();
                if x > self.domain_cap || !x.is_finite() {
                    return Err(out_of_range());
                }
                Ok(x)
            }
            ProfileKind::Custom(_) => {
                let s = (-1.0 / t).exp();
                if s > self.max_value() {
                    return Err(out_of_range());
                }
                self.inverse(s)
            }
        }
    }

    /// `x` with `f(x) = 1`, or `+inf` when `f < 1` on the whole trusted range.
    pub fn unit_level(&self) -> f64 {
        if self.max_value() < 1.0 {
            f64::INFINITY
        } else {
            self.inverse(1.0).unwrap_or(f64::INFINITY)
        }
    }
}

fn bisect_monotone(f: &(dyn Fn(f64) -> f64 + Send + Sync), t: f64, cap: f64, f_cap: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, cap);
    let (mut f_lo, mut f_hi) = (f(0.0), f_cap);
    let tol = INVERSE_RTOL * t + INVERSE_ATOL;
    for _ in 0..2048 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if !(f_mid >= f_lo && f_mid <= f_hi) {
            return Err(Error::InvalidProfile(format!(
                "profile is not monotone: f({mid}) = {f_mid} lies outside [f({lo}), f({hi})] = [{f_lo}, {f_hi}]"
            )));
        }
        if (f_mid - t).abs() <= tol {
            return Ok(mid);
        }
        if f_mid < t {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(if (f_lo - t).abs() <= (f_hi - t).abs() { lo } else { hi })
}

/// A verified doubling constant `sigma` for `Lambda_f` on `[0, range_end]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingCertificate {
    pub sigma: f64,
    pub range_end: f64,
    pub grid_size: usize,
    /// `max(2 Lambda(x) - Lambda(sigma x))` over the verification grid.
    pub max_violation: f64,
}

impl DoublingCertificate {
    pub fn is_valid(&self) -> bool {
        self.max_violation <= 0.0
    }

    /// Re-evaluates the doubling inequality on a fresh grid of `grid_size` points.
    pub fn verify(&self, profile: &ProfileFunction, grid_size: usize) -> Result<f64> {
        doubling_violation(profile, self.sigma, self.range_end, grid_size)
    }
}

/// Half geometric (twelve decades below `x_max`), half uniform; always includes 0 and `x_max`.
fn doubling_grid(x_max: f64, grid_size: usize) -> Vec<f64> {
    let n_geo = grid_size / 2;
    let n_uni = grid_size - n_geo;
    let mut xs = Vec::with_capacity(grid_size + 1);
    xs.push(0.0);
    for i in 0..n_geo {
        let e = -12.0 * (1.0 - i as f64 / (n_geo.max(2) - 1) as f64);
        xs.push(x_max * 10f64.powf(e));
    }
    for i in 1..=n_uni {
        xs.push(x_max * i as f64 / n_uni as f64);
    }
    xs
}

fn doubling_violation(profile: &ProfileFunction, sigma: f64, range_end: f64, grid_size: usize) -> Result<f64> {
    let x_max = range_end / sigma;
    let mut worst = f64::NEG_INFINITY;
    for x in doubling_grid(x_max, grid_size) {
        let sx = (sigma * x).min(range_end);
        let v = 2.0 * profile.lambda(x)? - profile.lambda(sx)?;
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Smallest doubling constant for `Lambda_f` on `[0, range_end]`.
///
/// Walks `sigma - 1` geometrically from `2^-20` upwards (four steps per
/// octave) and refines the first passing bracket by bisection, so the
/// returned `sigma` always satisfies the inequality on the grid.
pub fn doubling_constant(profile: &ProfileFunction, range_end: f64, grid_size: usize) -> Result<DoublingCertificate> {
    if grid_size < 64 {
        return Err(Error::range("grid_size", grid_size as f64, "[64, inf)"));
    }
    let unit = profile.unit_level();
    if !(range_end > 0.0 && range_end <= profile.domain_cap() && range_end < unit) {
        return Err(Error::range(
            "R",
            range_end,
            format!("(0, min(cap = {}, f^-1(1) = {unit}))", profile.domain_cap()),
        ));
    }
    let passes = |sigma: f64| -> Result<bool> { Ok(doubling_violation(profile, sigma, range_end, grid_size)? <= 0.0) };

    let mut prev = 1.0;
    let mut step = 0u32;
    let hit = loop {
        let sigma = (1.0 + 2f64.powf(-20.0 + step as f64 / 4.0)).min(SIGMA_MAX);
        if passes(sigma)? {
            break sigma;
        }
        if sigma >= SIGMA_MAX {
            return Err(Error::NotDoubling {
                range_end,
                max_sigma: SIGMA_MAX,
            });
        }
        prev = sigma;
        step += 1;
    };

    let (mut lo, mut hi) = (prev, hit);
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let max_violation = doubling_violation(profile, hi, range_end, grid_size)?;
    Ok(DoublingCertificate {
        sigma: hi,
        range_end,
        grid_size,
        max_violation,
    })
}

/// Measured constant of the `Lambda^{-1}` growth lemma:
/// `max_t ([L^-1(2t)]^m - [L^-1(t)]^m) / [L^-1(t)]^m` over a geometric grid
/// in `(0, t_max]`. The lemma guarantees the result is at most `sigma^m - 1`.
pub fn lemma31_ratio(
    profile: &ProfileFunction,
    certificate: &DoublingCertificate,
    m: f64,
    t_max: f64,
    grid_size: usize,
) -> Result<f64> {
    if grid_size < 64 {
        return Err(Error::range("grid_size", grid_size as f64, "[64, inf)"));
    }
    if !(m >= 1.0) {
        return Err(Error::range("m", m, "[1, inf)"));
    }
    let t_cap = profile.lambda(certificate.range_end / certificate.sigma)?;
    if !(t_max > 0.0 && t_max <= t_cap * (1.0 + 1e-12)) {
        return Err(Error::range("T", t_max, format!("(0, Lambda(R/sigma) = {t_cap}]")));
    }
    let mut worst = f64::NEG_INFINITY;
    for i in 0..grid_size {
        let e = -6.0 * (1.0 - i as f64 / (grid_size - 1) as f64);
        let t = t_max * 10f64.powf(e);
        let base = profile.lambda_inverse(t)?;
        if base == 0.0 {
            continue;
        }
        let doubled = profile.lambda_inverse(2.0 * t)?;
        let ratio = (doubled / base).powf(m) - 1.0;
        worst = worst.max(ratio);
    }
    if worst.is_finite() {
        Ok(worst)
    } else {
        Err(Error::InvalidProfile("Lambda^-1 underflows on the whole grid".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum TypeReport {
    FiniteType { m_est: f64, c_est: f64 },
    MildlyInfinite { doubling: DoublingCertificate },
    Unknown,
}

const FIT_RESIDUAL_MAX: f64 = 1e-3;
const FIT_POINTS: usize = 32;
const CLASSIFY_GRID: usize = 256;

/// Range on which [`classify`] looks for a doubling constant.
pub fn default_doubling_range(profile: &ProfileFunction) -> f64 {
    let limit = profile.domain_cap().min(profile.unit_level());
    (0.1 * profile.domain_cap()).min(0.5 * limit)
}

/// Finite type when `ln f` is affine in `ln x` on `[1e-6, 1e-3]` with slope
/// above 1; mildly infinite when `ln f / ln x` blows up and a doubling
/// certificate exists; otherwise unknown.
pub fn classify(profile: &ProfileFunction) -> TypeReport {
    let cap = profile.domain_cap();
    let xs: Vec<f64> = (0..FIT_POINTS)
        .map(|i| 10f64.powf(-6.0 + 3.0 * i as f64 / (FIT_POINTS - 1) as f64))
        .filter(|&x| x <= cap)
        .collect();
    let logs: Option<Vec<(f64, f64)>> = xs
        .iter()
        .map(|&x| profile.ln_eval(x).ok().filter(|v| v.is_finite()).map(|y| (x.ln(), y)))
        .collect();

    if let Some(points) = logs.filter(|p| p.len() >= 8) {
        let (slope, intercept, residual) = crate::bounds::least_squares(&points);
        if residual < FIT_RESIDUAL_MAX && slope > 1.0 + FIT_RESIDUAL_MAX {
            return TypeReport::FiniteType {
                m_est: slope,
                c_est: intercept.exp(),
            };
        }
    }

    let ratio = |x: f64| profile.ln_eval(x).ok().map(|l| l / x.ln());
    let (near, far) = match (ratio(1e-3_f64.min(cap * 0.5)), ratio(1e-12)) {
        (Some(a), Some(b)) => (a, b),
        _ => return TypeReport::Unknown,
    };
    if near > 1.0 && far > 10.0 * near {
        if let Ok(cert) = doubling_constant(profile, default_doubling_range(profile), CLASSIFY_GRID) {
            if cert.is_valid() {
                return TypeReport::MildlyInfinite { doubling: cert };
            }
        }
    }
    TypeReport::Unknown
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_closed_forms() {
        let p4 = ProfileFunction::power(4.0, 1.0).unwrap();
        assert_eq!(p4.eval(0.5).unwrap(), 0.0625);
        let e1 = ProfileFunction::exp_flat(1.0).unwrap();
        assert_relative_eq!(e1.eval(0.5).unwrap(), (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(e1.eval(0.5).unwrap(), 0.1353353, max_relative = 1e-6);
        for p in [&p4, &e1] {
            assert_eq!(p.eval(0.0).unwrap(), 0.0);
        }
        let c = ProfileFunction::custom(|x| x * x * x).unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_out_of_range() {
        let p = ProfileFunction::power(2.0, 1.0).unwrap();
        assert!(matches!(p.eval(1.5), Err(Error::Range { .. })));
        assert!(matches!(p.eval(-0.1), Err(Error::Range { .. })));
    }

    #[test]
    fn inverse_closed_forms() {
        let p4 = ProfileFunction::power(4.0, 1.0).unwrap();
        assert_relative_eq!(p4.inverse(0.0625).unwrap(), 0.5, max_relative = 1e-15);
        let e1 = ProfileFunction::exp_flat(1.0).unwrap();
        assert_relative_eq!(e1.inverse((-2.0f64).exp()).unwrap(), 0.5, max_relative = 1e-14);
        assert!(matches!(p4.inverse(1.5), Err(Error::Range { .. })));
    }

    #[test]
    fn custom_inverse_by_bisection() {
        let c = ProfileFunction::custom(|x| x.powi(3) + x.powi(5)).unwrap();
        let x = c.inverse(0.2).unwrap();
        assert_relative_eq!(c.eval(x).unwrap(), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn non_monotone_custom_is_rejected() {
        // rises to 1 at x = 0.25, dips back to 0.5 at 0.75, ends at 1.
        let c = ProfileFunction::custom(|x: f64| {
            if x < 0.25 {
                4.0 * x
            } else if x < 0.75 {
                1.0 - (x - 0.25)
            } else {
                0.5 + 2.0 * (x - 0.75)
            }
        })
        .unwrap();
        assert!(matches!(c.inverse(0.3), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn custom_must_vanish_at_zero() {
        assert!(matches!(ProfileFunction::custom(|x| x + 1.0), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn lambda_examples() {
        let e1 = ProfileFunction::exp_flat(1.0).unwrap();
        assert_relative_eq!(e1.lambda(0.3).unwrap(), 0.3, max_relative = 1e-15);
        let e2 = ProfileFunction::exp_flat(2.0).unwrap();
        assert_relative_eq!(e2.lambda(0.5).unwrap(), 0.25, max_relative = 1e-15);
        let p2 = ProfileFunction::power(2.0, 1.0).unwrap();
        assert_relative_eq!(p2.lambda((-1.0f64).exp()).unwrap(), 0.5, max_relative = 1e-14);
        assert_eq!(p2.lambda(0.0).unwrap(), 0.0);
    }

    #[test]
    fn lambda_rejects_values_at_or_above_one() {
        let p = ProfileFunction::power(2.0, 4.0).unwrap();
        assert!(matches!(p.lambda(0.9), Err(Error::Range { .. })));
    }

    #[test]
    fn inverse_via_lambda_identity() {
        for p in [
            ProfileFunction::power(3.0, 1.0).unwrap(),
            ProfileFunction::exp_flat(1.5).unwrap(),
            ProfileFunction::custom(|x| x * x * (1.0 + x)).unwrap(),
        ] {
            for s in [1e-8, 1e-4, 0.01, 0.2] {
                let direct = p.inverse(s).unwrap();
                let via = p.lambda_inverse(-1.0 / s.ln()).unwrap();
                assert_relative_eq!(direct, via, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn doubling_examples() {
        for (p, r, expected) in [(1.0, 0.1, 2.0), (2.0, 0.1, 2f64.sqrt()), (0.5, 0.05, 4.0)] {
            let prof = ProfileFunction::exp_flat(p).unwrap();
            let cert = doubling_constant(&prof, r, 256).unwrap();
            assert!((cert.sigma - expected).abs() < 1e-6, "p={p}: {}", cert.sigma);
            assert!(cert.is_valid());
            assert_eq!(cert.range_end, r);
        }
    }

    #[test]
    fn power_profiles_are_not_doubling() {
        let p = ProfileFunction::power(2.0, 1.0).unwrap();
        assert!(matches!(doubling_constant(&p, 0.1, 128), Err(Error::NotDoubling { .. })));
    }

    #[test]
    fn doubling_rejects_small_grid() {
        let p = ProfileFunction::exp_flat(1.0).unwrap();
        assert!(doubling_constant(&p, 0.1, 10).is_err());
    }

    #[test]
    fn growth_ratio_examples() {
        let e1 = ProfileFunction::exp_flat(1.0).unwrap();
        let cert = doubling_constant(&e1, 0.1, 256).unwrap();
        let t_max = e1.lambda(cert.range_end / cert.sigma).unwrap();
        let c1 = lemma31_ratio(&e1, &cert, 1.0, t_max, 256).unwrap();
        assert_relative_eq!(c1, 1.0, max_relative = 1e-12);
        let c2 = lemma31_ratio(&e1, &cert, 2.0, t_max, 256).unwrap();
        assert_relative_eq!(c2, 3.0, max_relative = 1e-12);

        // Closed-form oracle: Lambda^{-1}(t) = t^{1/p}, so the ratio is 2^{m/p} - 1.
        let e2 = ProfileFunction::exp_flat(2.0).unwrap();
        let cert2 = doubling_constant(&e2, 0.1, 256).unwrap();
        let t2 = e2.lambda(cert2.range_end / cert2.sigma).unwrap();
        let c = lemma31_ratio(&e2, &cert2, 2.0, t2, 256).unwrap();
        let oracle = 2f64.powf(2.0 / 2.0) - 1.0;
        assert!((c - oracle).abs() < 1e-9);
        assert!(c <= cert2.sigma.powi(2) - 1.0 + 1e-9);
        assert!((c - (cert2.sigma.powi(2) - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn growth_ratio_rejects_t_beyond_certificate() {
        let e1 = ProfileFunction::exp_flat(1.0).unwrap();
        let cert = doubling_constant(&e1, 0.1, 256).unwrap();
        assert!(matches!(lemma31_ratio(&e1, &cert, 1.0, 0.5, 256), Err(Error::Range { .. })));
    }

    #[test]
    fn classify_examples() {
        match classify(&ProfileFunction::power(4.0, 1.0).unwrap()) {
            TypeReport::FiniteType { m_est, c_est } => {
                assert!((m_est - 4.0).abs() < 1e-6);
                assert!((c_est - 1.0).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        match classify(&ProfileFunction::exp_flat(1.0).unwrap()) {
            TypeReport::MildlyInfinite { doubling } => assert!((doubling.sigma - 2.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        assert_eq!(classify(&ProfileFunction::custom(|x| x).unwrap()), TypeReport::Unknown);
    }

    #[test]
    fn profile_spec_roundtrip_through_json() {
        let spec: ProfileSpec = serde_json::from_str(r#"{"kind":"power","m":4.0,"c":1.0}"#).unwrap();
        assert_eq!(spec, ProfileSpec::Power { m: 4.0, c: 1.0 });
        let spec: ProfileSpec = serde_json::from_str(r#"{"kind":"expflat","p":1.0}"#).unwrap();
        assert!(matches!(spec.build().unwrap().kind(), ProfileKind::ExpFlat { .. }));
        assert!(serde_json::from_str::<ProfileSpec>(r#"{"kind":"custom"}"#).is_err());
    }
}
