//! Adaptive Gauss-Kronrod integration and the norm estimates of the
//! extremal candidate functions.
//!
//! All candidate norms are computed through the same relaxation: the
//! `Im w_n` integral is extended to the whole line and the `Re w_n` integral
//! to infinity, both done in closed form, which leaves a radial integral
//! over the tangential blocks. Only the last one is done numerically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelDomain, Point, RadialBlock};
use crate::profiles::ProfileFunction;
use num_complex::Complex64;

/// Default relative tolerance of the radial integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-9;
/// Subdivision budget per 1-D integral.
pub const MAX_SUBDIVISIONS: usize = 4000;
/// Blocks up to this count are integrated as a nested tensor product.
pub const TENSOR_MAX_BLOCKS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// `int_a^b f` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<IntegralResult> {
    integrate_with(&f, &[a, b], Tolerance::absolute(tol), MAX_SUBDIVISIONS)
}

/// Globally adaptive integration over consecutive `breakpoints`; the panel
/// with the largest error estimate is bisected until the summed estimate
/// meets `tol`.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    tol: Tolerance,
    max_subdivisions: usize,
) -> Result<IntegralResult> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Input(format!("integration breakpoints must be strictly increasing: {breakpoints:?}")));
    }
    let (a, b) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
    let mut heap: BinaryHeap<Panel> = breakpoints.windows(2).map(|w| kronrod15(f, w[0], w[1])).collect();
    let mut subdivisions = heap.len();
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Convergence {
                a,
                b,
                subdivisions,
                abs_error: error,
            });
        }
        if error <= tol.target(value) {
            return Ok(IntegralResult {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if subdivisions >= max_subdivisions || mid <= worst.a || mid >= worst.b {
            return Err(Error::Convergence {
                a,
                b,
                subdivisions,
                abs_error: error,
            });
        }
        heap.push(kronrod15(f, worst.a, mid));
        heap.push(kronrod15(f, mid, worst.b));
        subdivisions += 1;
    }
}

/// Breakpoints clustered around the radius where `f(r)` crosses `level`.
fn radial_breakpoints(profile: &ProfileFunction, level: f64, upper: f64) -> Vec<f64> {
    let mut pts = vec![0.0, upper];
    let capped = level.min(profile.max_value());
    if let Ok(scale) = profile.inverse(capped) {
        if scale > 0.0 {
            for i in -8..=8 {
                let r = scale * 2f64.powi(i);
                if r > 0.0 && r < upper {
                    pts.push(r);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * upper);
    pts
}

/// `int_0^upper r^a (scale / (f(r) + shift))^p dr`.
///
/// The scaled form keeps the integrand bounded by `r^a` when
/// `scale <= shift`, so deep boundary approach does not overflow.
pub fn scaled_radial_integral(
    profile: &ProfileFunction,
    r_power: f64,
    denom_power: f64,
    shift: f64,
    scale: f64,
    upper: f64,
    rel_tol: f64,
) -> Result<IntegralResult> {
    if !(shift > 0.0) {
        return Err(Error::range("t", shift, "(0, inf)"));
    }
    if upper > profile.domain_cap() {
        return Err(Error::range("upper limit", upper, format!("[0, domain_cap = {}]", profile.domain_cap())));
    }
    let integrand = |r: f64| {
        let f = profile.eval(r).unwrap_or(f64::NAN);
        let base = (scale / (f + shift)).powf(denom_power);
        if r_power == 0.0 {
            base
        } else {
            r.powf(r_power) * base
        }
    };
    let pts = radial_breakpoints(profile, shift, upper);
    integrate_with(&integrand, &pts, Tolerance::relative(rel_tol), MAX_SUBDIVISIONS)
}

/// `int_0^1 r^{k-1} / (f(r) + t)^k dr`.
pub fn prop32_integral(profile: &ProfileFunction, k: u32, t: f64) -> Result<IntegralResult> {
    if k == 0 {
        return Err(Error::range("k", 0.0, "[1, inf)"));
    }
    let scaled = scaled_radial_integral(profile, (k - 1) as f64, k as f64, t, t, 1.0, DEFAULT_REL_TOL)?;
    let factor = t.powi(-(k as i32));
    Ok(IntegralResult {
        value: scaled.value * factor,
        abs_error: scaled.abs_error * factor,
        subdivisions: scaled.subdivisions,
    })
}

/// `prop32_integral * t^k / [f^{-1}(t)]^k`, which stays bounded as `t -> 0`
/// for finite-type and mildly-infinite-type profiles.
pub fn prop32_ratio(profile: &ProfileFunction, k: u32, t: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::range("k", 0.0, "[1, inf)"));
    }
    let scaled = scaled_radial_integral(profile, (k - 1) as f64, k as f64, t, t, 1.0, DEFAULT_REL_TOL)?;
    let inv = profile.inverse(t)?;
    Ok(scaled.value / inv.powi(k as i32))
}

/// `int_0^1 r^{2 n_j + 1} / (f(r) + t)^{2(n_j + 1)} dr`.
pub fn tangential_weighted_integral(profile: &ProfileFunction, n_j: u32, t: f64) -> Result<IntegralResult> {
    if n_j == 0 {
        return Err(Error::range("n_j", 0.0, "[1, inf)"));
    }
    let p = 2.0 * (n_j as f64 + 1.0);
    let scaled = scaled_radial_integral(profile, 2.0 * n_j as f64 + 1.0, p, t, t, 1.0, DEFAULT_REL_TOL)?;
    let factor = t.powf(-p);
    Ok(IntegralResult {
        value: scaled.value * factor,
        abs_error: scaled.abs_error * factor,
        subdivisions: scaled.subdivisions,
    })
}

/// `int_R dv / (a^2 + v^2)^n = c_n a^{1 - 2n}` with
/// `c_n = pi binom(2n - 2, n - 1) / 4^{n - 1}`.
pub fn line_constant(n: usize) -> f64 {
    assert!(n >= 1);
    // binom(2m, m) / 4^m as a running product to avoid overflow
    let m = n - 1;
    let mut c = PI;
    for i in 1..=m {
        c *= (2 * i - 1) as f64 / (2 * i) as f64;
    }
    c
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    // 2 pi^{d/2} / Gamma(d/2)
    let half = d as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(d)
}

fn gamma_half_integer(d: usize) -> f64 {
    // Gamma(d/2) for positive integer d
    if d % 2 == 0 {
        (1..d / 2).map(|i| i as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < d as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormMode {
    /// Exact nested radial quadrature over all blocks.
    Tensor,
    /// Product of one-block integrals after `(F+t)^P >= prod (f_j + t)^{P_j}`.
    Separated,
}

impl NormMode {
    pub fn auto(k: usize) -> Self {
        if k <= TENSOR_MAX_BLOCKS {
            NormMode::Tensor
        } else {
            NormMode::Separated
        }
    }
}

/// Quadrature mode and tolerance shared by the norm estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSettings {
    /// `None` picks [`NormMode::auto`] from the block count.
    pub mode: Option<NormMode>,
    pub rel_tol: f64,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self {
            mode: None,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl NormSettings {
    pub fn with_mode(mode: NormMode) -> Self {
        Self {
            mode: Some(mode),
            ..Self::default()
        }
    }

    pub fn mode_for(&self, k: usize) -> NormMode {
        self.mode.unwrap_or_else(|| NormMode::auto(k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundMode {
    UpperCertified,
    Estimate,
}

/// Breakdown of a norm bound: `value = inner_closed_form * radial_factor * gradient_factor + tail`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormComponents {
    pub inner_closed_form: f64,
    pub radial_factor: f64,
    pub radial_abs_error: f64,
    pub gradient_factor: f64,
    pub tail: f64,
    pub a_max: f64,
    pub quadrature: NormMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBound {
    pub value: f64,
    pub mode: BoundMode,
    pub components: NormComponents,
}

/// Integral over the product of truncated block balls of
/// `prod_j r_j^{extra_j} * (t / (F + t))^power`, with `F = sum f_j(r_j)`.
///
/// `separated_powers` gives the per-block exponents used by
/// [`NormMode::Separated`]; their sum must not exceed `power`.
pub(crate) fn block_integral(
    blocks: &[RadialBlock],
    extra_r_powers: &[f64],
    power: f64,
    separated_powers: &[f64],
    t: f64,
    truncation: f64,
    mode: NormMode,
    rel_tol: f64,
) -> Result<IntegralResult> {
    debug_assert_eq!(blocks.len(), extra_r_powers.len());
    match mode {
        NormMode::Separated => {
            debug_assert!(separated_powers.iter().sum::<f64>() <= power + 1e-12);
            let mut value = 1.0;
            let mut rel_err = 0.0;
            let mut subdivisions = 0;
            for ((b, &extra), &p) in blocks.iter().zip(extra_r_powers).zip(separated_powers) {
                let r = scaled_radial_integral(&b.profile, (b.real_dim - 1) as f64 + extra, p, t, t, truncation, rel_tol)?;
                value *= sphere_area(b.real_dim) * r.value;
                rel_err += r.abs_error / r.value;
                subdivisions += r.subdivisions;
            }
            Ok(IntegralResult {
                value,
                abs_error: value * rel_err,
                subdivisions,
            })
        }
        NormMode::Tensor => {
            let inner_tol = rel_tol * 0.1;
            let value = nested(blocks, extra_r_powers, power, t, 0.0, truncation, rel_tol, inner_tol)?;
            Ok(IntegralResult {
                value: value.value,
                abs_error: value.abs_error + value.value * inner_tol * blocks.len() as f64,
                subdivisions: value.subdivisions,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn nested(
    blocks: &[RadialBlock],
    extra: &[f64],
    power: f64,
    t: f64,
    acc: f64,
    truncation: f64,
    tol: f64,
    inner_tol: f64,
) -> Result<IntegralResult> {
    let (first, rest) = blocks.split_first().expect("at least one block");
    let area = sphere_area(first.real_dim);
    let r_power = (first.real_dim - 1) as f64 + extra[0];
    let profile = &first.profile;
    if rest.is_empty() {
        let r = scaled_radial_integral(profile, r_power, power, acc + t, t, truncation, tol)?;
        return Ok(IntegralResult {
            value: area * r.value,
            abs_error: area * r.abs_error,
            subdivisions: r.subdivisions,
        });
    }
    let failure = std::cell::Cell::new(None);
    let integrand = |r: f64| {
        let f = profile.eval(r).unwrap_or(f64::NAN);
        match nested(rest, &extra[1..], power, t, acc + f, truncation, inner_tol, inner_tol) {
            Ok(v) => r.powf(r_power) * v.value,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let pts = radial_breakpoints(profile, acc + t, truncation);
    let outer = integrate_with(&integrand, &pts, Tolerance::relative(tol), MAX_SUBDIVISIONS);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    Ok(IntegralResult {
        value: area * outer.value,
        abs_error: area * outer.abs_error,
        subdivisions: outer.subdivisions,
    })
}

/// Knobs for the surface norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceOptions {
    /// Multiply by `1.01 * sup sqrt(1 + |grad F|^2)`.
    pub gradient: bool,
    /// Add the far-boundary term `(t / (2 t0))^{2n} A_max`.
    pub tail: bool,
    pub a_max: f64,
    pub gradient_grid: usize,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self {
            gradient: true,
            tail: true,
            a_max: 100.0,
            gradient_grid: 4096,
        }
    }
}

fn check_point<D: ModelDomain + ?Sized>(domain: &D, z: &Point) -> Result<f64> {
    if !domain.contains(z)? {
        return Err(Error::Input("point is not inside the model domain".into()));
    }
    let t = z.t();
    if t > domain.t0() {
        return Err(Error::range("Re z_n", t, format!("(0, t0 = {}]", domain.t0())));
    }
    Ok(t)
}

/// Certified upper bound of `int_{D∩U} |phi|^2` for
/// `phi(w) = t^n / (w_n - i Im z_n + t)^n`.
pub fn phi_norm_sq_upper<D: ModelDomain + ?Sized>(domain: &D, z: &Point, settings: &NormSettings) -> Result<NormBound> {
    let t = check_point(domain, z)?;
    let n = domain.total_dim();
    let blocks = domain.radial_blocks();
    let mode = settings.mode_for(blocks.len());
    let dims: Vec<f64> = blocks.iter().map(|b| b.real_dim as f64).collect();
    let power = (2 * n - 2) as f64;
    let j = block_integral(&blocks, &vec![0.0; blocks.len()], power, &dims, t, domain.truncation(), mode, settings.rel_tol)?;
    let inner = line_constant(n) / power;
    let radial = t * t * (j.value + j.abs_error);
    Ok(NormBound {
        value: inner * radial,
        mode: BoundMode::UpperCertified,
        components: NormComponents {
            inner_closed_form: inner,
            radial_factor: radial,
            radial_abs_error: t * t * j.abs_error,
            gradient_factor: 1.0,
            tail: 0.0,
            a_max: 0.0,
            quadrature: mode,
        },
    })
}

/// Upper bound of `int_{bD} |phi|^2 dsigma` over the graph boundary plus the
/// far-boundary tail.
pub fn phi_surface_norm_sq_upper<D: ModelDomain + ?Sized>(
    domain: &D,
    z: &Point,
    settings: &NormSettings,
    opts: &SurfaceOptions,
) -> Result<NormBound> {
    let t = check_point(domain, z)?;
    let n = domain.total_dim();
    let blocks = domain.radial_blocks();
    let mode = settings.mode_for(blocks.len());
    let dims: Vec<f64> = blocks.iter().map(|b| b.real_dim as f64).collect();
    let power = (2 * n - 1) as f64;
    let j = block_integral(&blocks, &vec![0.0; blocks.len()], power, &dims, t, domain.truncation(), mode, settings.rel_tol)?;
    let inner = line_constant(n);
    let radial = t * (j.value + j.abs_error);
    let gradient_factor = if opts.gradient {
        1.01 * domain.gradient_sup(opts.gradient_grid)?
    } else {
        1.0
    };
    let tail = if opts.tail {
        (t / (2.0 * domain.t0())).powi(2 * n as i32) * opts.a_max
    } else {
        0.0
    };
    Ok(NormBound {
        value: inner * radial * gradient_factor + tail,
        mode: BoundMode::UpperCertified,
        components: NormComponents {
            inner_closed_form: inner,
            radial_factor: radial,
            radial_abs_error: t * j.abs_error,
            gradient_factor,
            tail,
            a_max: if opts.tail { opts.a_max } else { 0.0 },
            quadrature: mode,
        },
    })
}

/// Upper bounds of `||psi_1||^2` and `||psi_2||^2` for the normal-direction
/// candidate, with `|xi_n| = 1`.
///
/// `psi_1 = (2t)^{n+1} / (w_n - i Im z_n + t)^n`,
/// `psi_2 = (2t)^{n+2} / (w_n - i Im z_n + t)^{n+1}`.
pub fn psi_normal_norms_sq_upper<D: ModelDomain + ?Sized>(domain: &D, z: &Point, settings: &NormSettings) -> Result<(f64, f64)> {
    let t = check_point(domain, z)?;
    let n = domain.total_dim();
    let phi = phi_norm_sq_upper(domain, z, settings)?;
    let psi1 = 4f64.powi(n as i32 + 1) * t * t * phi.value;

    let blocks = domain.radial_blocks();
    let mode = settings.mode_for(blocks.len());
    let dims: Vec<f64> = blocks.iter().map(|b| b.real_dim as f64).collect();
    let power = (2 * n) as f64;
    let j = block_integral(&blocks, &vec![0.0; blocks.len()], power, &dims, t, domain.truncation(), mode, settings.rel_tol)?;
    // (2t)^{2n+4} (F+t)^{-2n} = 2^{2n+4} t^4 (t/(F+t))^{2n}
    let psi2 = 2f64.powi(2 * n as i32 + 4) * t.powi(4) * line_constant(n + 1) / power * (j.value + j.abs_error);
    Ok((psi1, psi2))
}

/// Upper bounds of `||psi*_1||^2` and `||psi*_2||^2` for the tangential
/// candidate of block `block` along `direction`, normalized to unit length.
pub fn psi_tangential_norms_sq_upper(
    domain: &crate::geometry::DomainDescriptor,
    z: &Point,
    block: usize,
    direction: &[Complex64],
    settings: &NormSettings,
) -> Result<(f64, f64)> {
    let t = check_point(domain, z)?;
    let n = domain.total_dim();
    let blocks = domain.radial_blocks();
    let mode = settings.mode_for(blocks.len());
    let b = blocks
        .get(block)
        .ok_or_else(|| Error::Input(format!("block index {block} out of range")))?;
    let n_j = b.real_dim / 2;
    let z_j = &z.block_parts[block];
    if direction.len() != z_j.len() {
        return Err(Error::Input(format!("direction has {} coordinates, block {block} has {}", direction.len(), z_j.len())));
    }
    let dir_norm = crate::geometry::norm(direction);
    if dir_norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    // Rotating block j so that the direction becomes a coordinate axis leaves
    // the domain invariant; z^j then contributes its projection on that axis.
    let z_l: Complex64 = z_j.iter().zip(direction).map(|(a, d)| a * d.conj()).sum::<Complex64>() / dir_norm;
    let power = (2 * n) as f64;
    let prefactor = 2f64.powi(2 * n as i32 + 2) * t * t * line_constant(n + 1) / power;

    // |w_l|^2 averages to r_j^2 / n_j over the sphere of block j.
    let mut extra = vec![0.0; blocks.len()];
    extra[block] = 2.0;
    let mut sep: Vec<f64> = blocks.iter().map(|b| b.real_dim as f64).collect();
    sep[block] += 2.0;
    let weighted = block_integral(&blocks, &extra, power, &sep, t, domain.truncation(), mode, settings.rel_tol)?;
    let psi1 = prefactor * (weighted.value + weighted.abs_error) / n_j as f64;

    let psi2 = if z_l.norm_sqr() == 0.0 {
        0.0
    } else {
        let dims: Vec<f64> = blocks.iter().map(|b| b.real_dim as f64).collect();
        let plain = block_integral(&blocks, &vec![0.0; blocks.len()], power, &dims, t, domain.truncation(), mode, settings.rel_tol)?;
        prefactor * z_l.norm_sqr() * (plain.value + plain.abs_error)
    };
    Ok((psi1, psi2))
}
