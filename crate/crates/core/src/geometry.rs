//! Model domains `{Re z_n > F(z')}` truncated to a box, approach regions,
//! approach paths and the inscribed product-of-balls regions used for
//! upper bounds.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::profiles::ProfileFunction;

/// One complex coordinate block `z^j` in `C^{n_j}` together with its profile.
#[derive(Clone, Debug)]
pub struct Block {
    pub dim: usize,
    pub profile: ProfileFunction,
}

/// A block of a radial product integral: a ball in `R^{real_dim}` on which
/// the integrand depends only on the radius through `profile`.
#[derive(Clone, Debug)]
pub struct RadialBlock {
    pub real_dim: usize,
    pub profile: ProfileFunction,
}

/// Truncated model domain `D ∩ U`.
///
/// `U` is the product of the closed balls `|z^j| <= truncation` with the
/// square `0 <= Re z_n <= truncation`, `|Im z_n| <= truncation`.
#[derive(Clone, Debug)]
pub struct DomainDescriptor {
    blocks: Vec<Block>,
    truncation: f64,
    t0: f64,
    convex: bool,
}

impl DomainDescriptor {
    pub fn new(blocks: Vec<Block>, truncation: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Input("a domain needs at least one block".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.dim == 0) {
            return Err(Error::Input(format!("block dimension must be >= 1, got {}", b.dim)));
        }
        if !(truncation.is_finite() && truncation > 0.0) {
            return Err(Error::range("truncation", truncation, "(0, inf)"));
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.profile.domain_cap() < truncation {
                return Err(Error::Input(format!(
                    "profile of block {j} is trusted only up to {} < truncation {truncation}",
                    b.profile.domain_cap()
                )));
            }
        }
        Ok(Self {
            blocks,
            truncation,
            t0: 0.05 * truncation,
            convex: false,
        })
    }

    /// Single block `{Re z_2 > f(|z_1|)}` in `C^2`.
    pub fn single(profile: ProfileFunction) -> Result<Self> {
        Self::new(vec![Block { dim: 1, profile }], 1.0)
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0 < self.truncation) {
            return Err(Error::range("t0", t0, format!("(0, truncation = {})", self.truncation)));
        }
        self.t0 = t0;
        Ok(self)
    }

    /// Records the caller's assertion that the boundary is convex near 0.
    pub fn with_convex(mut self, convex: bool) -> Self {
        self.convex = convex;
        self
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    /// Complex dimension `n = 1 + sum n_j`.
    pub fn total_dim(&self) -> usize {
        1 + self.blocks.iter().map(|b| b.dim).sum::<usize>()
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn convex(&self) -> bool {
        self.convex
    }

    pub fn radial_blocks(&self) -> Vec<RadialBlock> {
        self.blocks
            .iter()
            .map(|b| RadialBlock {
                real_dim: 2 * b.dim,
                profile: b.profile.clone(),
            })
            .collect()
    }

    pub(crate) fn check_shape(&self, z: &Point) -> Result<()> {
        if z.block_parts.len() != self.k()
            || z.block_parts.iter().zip(&self.blocks).any(|(part, b)| part.len() != b.dim)
        {
            return Err(Error::Input(format!(
                "point has block shape {:?}, domain expects {:?}",
                z.block_parts.iter().map(Vec::len).collect::<Vec<_>>(),
                self.blocks.iter().map(|b| b.dim).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    /// `F(z') = sum_j f_j(|z^j|)`.
    pub fn f_total(&self, z: &Point) -> Result<f64> {
        self.check_shape(z)?;
        let mut total = 0.0;
        for (part, b) in z.block_parts.iter().zip(&self.blocks) {
            let r = norm(part);
            if r > self.truncation {
                return Err(Error::range("|z^j|", r, format!("[0, truncation = {}]", self.truncation)));
            }
            total += b.profile.eval(r)?;
        }
        Ok(total)
    }

    /// Defining function `F(z') - Re z_n`; negative inside.
    pub fn rho(&self, z: &Point) -> Result<f64> {
        Ok(self.f_total(z)? - z.z_n.re)
    }

    pub fn contains(&self, z: &Point) -> Result<bool> {
        Ok(self.rho(z)? < 0.0)
    }

    fn check_approach(&self, approach: &ApproachSpec) -> Result<()> {
        if approach.alpha.len() != self.k() {
            return Err(Error::Input(format!(
                "alpha has {} entries but the domain has {} blocks",
                approach.alpha.len(),
                self.k()
            )));
        }
        Ok(())
    }

    /// `Re z_n > k beta sum_j f_j(alpha_j |z^j|)`.
    pub fn gamma_contains(&self, approach: &ApproachSpec, z: &Point) -> Result<bool> {
        self.check_shape(z)?;
        self.check_approach(approach)?;
        let mut total = 0.0;
        for ((part, b), alpha) in z.block_parts.iter().zip(&self.blocks).zip(&approach.alpha) {
            total += b.profile.eval(alpha * norm(part))?;
        }
        Ok(z.z_n.re > self.k() as f64 * approach.beta * total)
    }

    /// Samples the approach path at height `t`; the point must lie in the
    /// approach region.
    pub fn approach_point(&self, approach: &ApproachSpec, t: f64) -> Result<Point> {
        if !(t > 0.0 && t < self.truncation) {
            return Err(Error::range("t", t, format!("(0, truncation = {})", self.truncation)));
        }
        self.check_approach(approach)?;
        let z = match &approach.path {
            ApproachPath::Radial => Point::on_axis(self, t),
            ApproachPath::Slanted { scale } => {
                let level = t / (scale * self.k() as f64 * approach.beta);
                let mut parts = Vec::with_capacity(self.k());
                for b in &self.blocks {
                    let mut part = vec![Complex64::new(0.0, 0.0); b.dim];
                    part[0] = Complex64::new(b.profile.inverse(level.min(b.profile.max_value()))?, 0.0);
                    parts.push(part);
                }
                Point::new(parts, Complex64::new(t, 0.0))
            }
            ApproachPath::Custom(path) => path(t),
        };
        if !self.gamma_contains(approach, &z)? {
            return Err(Error::Path { t });
        }
        Ok(z)
    }

    /// Product of balls centred at `z` with radii
    /// `(alpha_j - 1)/alpha_j * f_j^{-1}(t / (k beta))` and a disc of radius
    /// `(beta - 1)/beta * t` in the normal coordinate.
    pub fn polydisc(&self, approach: &ApproachSpec, z: &Point) -> Result<PolydiscRegion> {
        let t = z.t();
        if !self.gamma_contains(approach, z)? {
            return Err(Error::NotInCone(format!(
                "Re z_n = {t} does not exceed k beta sum f_j(alpha_j |z^j|)"
            )));
        }
        if t > self.t0 {
            return Err(Error::NotInCone(format!("Re z_n = {t} is above t0 = {}", self.t0)));
        }
        let level = t / (self.k() as f64 * approach.beta);
        let mut block_radii = Vec::with_capacity(self.k());
        for (b, alpha) in self.blocks.iter().zip(&approach.alpha) {
            block_radii.push((alpha - 1.0) / alpha * b.profile.inverse(level)?);
        }
        Ok(PolydiscRegion {
            center: z.clone(),
            block_dims: self.blocks.iter().map(|b| b.dim).collect(),
            block_radii,
            normal_radius: (approach.beta - 1.0) / approach.beta * t,
        })
    }

    /// Largest defining-function value over `samples` uniform draws from the region.
    pub fn polydisc_inclusion_check(&self, region: &PolydiscRegion, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let w = region.sample(&mut rng);
            worst = worst.max(self.rho(&w)?);
        }
        Ok(worst)
    }

    /// `sup sqrt(1 + |grad F|^2)` over a radial grid of the truncation box.
    pub fn gradient_sup(&self, grid: usize) -> Result<f64> {
        let mut sum = 0.0;
        for b in &self.blocks {
            sum += sup_derivative_sq(&b.profile, self.truncation, grid)?;
        }
        Ok((1.0 + sum).sqrt())
    }
}

pub(crate) fn sup_derivative_sq(profile: &ProfileFunction, upper: f64, grid: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for i in 0..=grid {
        let r = upper * i as f64 / grid as f64;
        let d = profile.derivative(r)?;
        best = best.max(d * d);
    }
    Ok(best)
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// A point `(z^1, ..., z^k, z_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub block_parts: Vec<Vec<Complex64>>,
    pub z_n: Complex64,
}

impl Point {
    pub fn new(block_parts: Vec<Vec<Complex64>>, z_n: Complex64) -> Self {
        Self { block_parts, z_n }
    }

    /// `(0, ..., 0, t)` shaped for `domain`.
    pub fn on_axis(domain: &DomainDescriptor, t: f64) -> Self {
        Self {
            block_parts: domain
                .blocks()
                .iter()
                .map(|b| vec![Complex64::new(0.0, 0.0); b.dim])
                .collect(),
            z_n: Complex64::new(t, 0.0),
        }
    }

    /// `t = Re z_n`.
    pub fn t(&self) -> f64 {
        self.z_n.re
    }

    /// All ambient coordinates `(z', z_n)` flattened.
    pub fn coords(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.block_parts.iter().flatten().copied().collect();
        out.push(self.z_n);
        out
    }
}

/// A tangent vector `xi = (xi^1, ..., xi^k, xi_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub blocks: Vec<Vec<Complex64>>,
    pub normal: Complex64,
}

impl Direction {
    pub fn normal(domain: &DomainDescriptor) -> Self {
        Self {
            blocks: domain
                .blocks()
                .iter()
                .map(|b| vec![Complex64::new(0.0, 0.0); b.dim])
                .collect(),
            normal: Complex64::new(1.0, 0.0),
        }
    }

    /// Unit vector along the last coordinate of block `j`.
    pub fn tangential(domain: &DomainDescriptor, j: usize) -> Result<Self> {
        let mut xi = Self::normal(domain);
        xi.normal = Complex64::new(0.0, 0.0);
        let block = xi
            .blocks
            .get_mut(j)
            .ok_or_else(|| Error::Input(format!("block index {j} out of range")))?;
        *block.last_mut().expect("blocks are non-empty") = Complex64::new(1.0, 0.0);
        Ok(xi)
    }

    pub fn is_zero(&self) -> bool {
        self.normal.norm_sqr() == 0.0 && self.blocks.iter().flatten().all(|c| c.norm_sqr() == 0.0)
    }

    pub(crate) fn check_shape(&self, domain: &DomainDescriptor) -> Result<()> {
        if self.blocks.len() != domain.k() || self.blocks.iter().zip(domain.blocks()).any(|(x, b)| x.len() != b.dim) {
            return Err(Error::Input("direction shape does not match the domain blocks".into()));
        }
        Ok(())
    }
}

pub type PathFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;

#[derive(Clone)]
pub enum ApproachPath {
    /// `z(t) = (0, ..., 0, t)`.
    Radial,
    /// `|z^j| = f_j^{-1}(t / (scale k beta))` along the first coordinate of every block.
    Slanted { scale: f64 },
    Custom(PathFn),
}

impl fmt::Debug for ApproachPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproachPath::Radial => f.write_str("Radial"),
            ApproachPath::Slanted { scale } => write!(f, "Slanted {{ scale: {scale} }}"),
            ApproachPath::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Cone parameters of the approach region and the path used to sample it.
#[derive(Clone, Debug)]
pub struct ApproachSpec {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub path: ApproachPath,
}

impl ApproachSpec {
    pub fn new(alpha: Vec<f64>, beta: f64, path: ApproachPath) -> Result<Self> {
        if let Some(&a) = alpha.iter().find(|&&a| !(a > 1.0 && a.is_finite())) {
            return Err(Error::range("alpha_j", a, "(1, inf)"));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::range("beta", beta, "(1, inf)"));
        }
        if let ApproachPath::Slanted { scale } = path {
            if !(scale > 0.0) {
                return Err(Error::range("path scale", scale, "(0, inf)"));
            }
        }
        Ok(Self { alpha, beta, path })
    }

    pub fn radial(alpha: Vec<f64>, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, ApproachPath::Radial)
    }
}

/// `B_{n_1}(z^1, r_1) x ... x B_{n_k}(z^k, r_k) x B_1(z_n, r_n)`.
#[derive(Clone, Debug)]
pub struct PolydiscRegion {
    pub center: Point,
    pub block_dims: Vec<usize>,
    pub block_radii: Vec<f64>,
    pub normal_radius: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl PolydiscRegion {
    pub fn volume(&self) -> f64 {
        let mut vol = PI * self.normal_radius * self.normal_radius;
        for (&n, &r) in self.block_dims.iter().zip(&self.block_radii) {
            vol *= PI.powi(n as i32) * r.powi(2 * n as i32) / factorial(n);
        }
        vol
    }

    /// Bergman kernel of the region at its centre, `1 / Vol`.
    pub fn center_kernel(&self) -> f64 {
        1.0 / self.volume()
    }

    /// Squared Bergman metric at the centre:
    /// `sum_j (n_j + 1)|xi^j|^2 / r_j^2 + 2|xi_n|^2 / r_n^2`.
    pub fn center_metric(&self, xi: &Direction) -> f64 {
        let mut total = 2.0 * xi.normal.norm_sqr() / (self.normal_radius * self.normal_radius);
        for ((part, &n), &r) in xi.blocks.iter().zip(&self.block_dims).zip(&self.block_radii) {
            let sq: f64 = part.iter().map(|c| c.norm_sqr()).sum();
            total += (n as f64 + 1.0) * sq / (r * r);
        }
        total
    }

    pub fn scaled(&self, block_factor: f64, normal_factor: f64) -> Self {
        Self {
            center: self.center.clone(),
            block_dims: self.block_dims.clone(),
            block_radii: self.block_radii.iter().map(|r| r * block_factor).collect(),
            normal_radius: self.normal_radius * normal_factor,
        }
    }

    /// Uniform draw from the region.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let block_parts = self
            .center
            .block_parts
            .iter()
            .zip(&self.block_dims)
            .zip(&self.block_radii)
            .map(|((c, &n), &r)| {
                let offset = sample_ball(rng, n, r);
                c.iter().zip(offset).map(|(a, b)| a + b).collect()
            })
            .collect();
        let z_n = self.center.z_n + sample_ball(rng, 1, self.normal_radius)[0];
        Point { block_parts, z_n }
    }
}

/// Uniform point in the ball of radius `r` in `C^n`: Gaussian direction,
/// radius `r U^{1/(2n)}`.
pub fn sample_ball<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let len = norm(&v);
    let u: f64 = rng.random();
    let scale = r * u.powf(1.0 / (2 * n) as f64) / len;
    v.iter_mut().for_each(|c| *c *= scale);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Re,
    Im,
}

/// A real coordinate `Re z_i` or `Im z_i` of `z'` (0-based `index`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RealCoord {
    pub index: usize,
    pub part: Part,
}

impl RealCoord {
    pub fn re(index: usize) -> Self {
        Self { index, part: Part::Re }
    }

    pub fn im(index: usize) -> Self {
        Self { index, part: Part::Im }
    }

    fn read(&self, zprime: &[Complex64]) -> f64 {
        match self.part {
            Part::Re => zprime[self.index].re,
            Part::Im => zprime[self.index].im,
        }
    }
}

impl std::str::FromStr for RealCoord {
    type Err = Error;

    /// Parses `re1`, `im2`, ... with 1-based complex indices.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (part, rest) = if let Some(rest) = lower.strip_prefix("re") {
            (Part::Re, rest)
        } else if let Some(rest) = lower.strip_prefix("im") {
            (Part::Im, rest)
        } else {
            return Err(Error::Input(format!("real coordinate `{s}` must look like re1 or im2")));
        };
        let index: usize = rest
            .trim_start_matches(|c: char| c == ' ' || c == 'z' || c == '_')
            .parse()
            .map_err(|_| Error::Input(format!("real coordinate `{s}` has no valid index")))?;
        if index == 0 {
            return Err(Error::Input(format!("real coordinate `{s}`: indices start at 1")));
        }
        Ok(Self { index: index - 1, part })
    }
}

/// A block of real coordinates `s^j` with its profile.
#[derive(Clone, Debug)]
pub struct ExtendedBlock {
    pub coords: Vec<RealCoord>,
    pub profile: ProfileFunction,
}

/// Model piece of an extended decoupled domain: decoupling over blocks of
/// real coordinates that need not respect the complex structure.
#[derive(Clone, Debug)]
pub struct ExtendedDomainDescriptor {
    blocks: Vec<ExtendedBlock>,
    truncation: f64,
    delta: f64,
    t0: f64,
    n: usize,
}

impl ExtendedDomainDescriptor {
    pub fn new(blocks: Vec<ExtendedBlock>, truncation: f64, delta: f64) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.coords.is_empty()) {
            return Err(Error::Input("extended domain needs non-empty real blocks".into()));
        }
        if !(truncation.is_finite() && truncation > 0.0) {
            return Err(Error::range("truncation", truncation, "(0, inf)"));
        }
        if !(delta > 0.0) {
            return Err(Error::range("delta", delta, "(0, inf)"));
        }
        let real_dims: usize = blocks.iter().map(|b| b.coords.len()).sum();
        if real_dims % 2 != 0 {
            return Err(Error::Input(format!("real block dimensions sum to {real_dims}, which is odd")));
        }
        let n = 1 + real_dims / 2;
        let mut seen = vec![[false; 2]; n - 1];
        for c in blocks.iter().flat_map(|b| &b.coords) {
            let slot = seen
                .get_mut(c.index)
                .ok_or_else(|| Error::Input(format!("real coordinate index {} exceeds n - 1 = {}", c.index + 1, n - 1)))?;
            let which = match c.part {
                Part::Re => 0,
                Part::Im => 1,
            };
            if slot[which] {
                return Err(Error::Input(format!("real coordinate {:?} z{} used twice", c.part, c.index + 1)));
            }
            slot[which] = true;
        }
        for b in &blocks {
            if b.profile.domain_cap() < truncation {
                return Err(Error::Input("profile domain cap is below the truncation".into()));
            }
        }
        Ok(Self {
            blocks,
            truncation,
            delta,
            t0: 0.05 * truncation,
            n,
        })
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0 < self.truncation) {
            return Err(Error::range("t0", t0, format!("(0, truncation = {})", self.truncation)));
        }
        self.t0 = t0;
        Ok(self)
    }

    pub fn blocks(&self) -> &[ExtendedBlock] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn radial_blocks(&self) -> Vec<RadialBlock> {
        self.blocks
            .iter()
            .map(|b| RadialBlock {
                real_dim: b.coords.len(),
                profile: b.profile.clone(),
            })
            .collect()
    }

    /// `(0, ..., 0, t)` with all of `z'` in a single part.
    pub fn axis_point(&self, t: f64) -> Point {
        Point::new(vec![vec![Complex64::new(0.0, 0.0); self.n - 1]], Complex64::new(t, 0.0))
    }

    /// `F(z') - Re z_n` with `F = sum_j f_j(|s^j|)`; the block parts of `z`
    /// are concatenated into `z'`.
    pub fn rho(&self, z: &Point) -> Result<f64> {
        let zprime: Vec<Complex64> = z.block_parts.iter().flatten().copied().collect();
        if zprime.len() != self.n - 1 {
            return Err(Error::Input(format!("point has {} tangential coordinates, expected {}", zprime.len(), self.n - 1)));
        }
        let mut total = 0.0;
        for b in &self.blocks {
            let s = b.coords.iter().map(|c| c.read(&zprime).powi(2)).sum::<f64>().sqrt();
            if s > self.truncation {
                return Err(Error::range("|s^j|", s, format!("[0, truncation = {}]", self.truncation)));
            }
            total += b.profile.eval(s)?;
        }
        Ok(total - z.z_n.re)
    }

    pub fn contains(&self, z: &Point) -> Result<bool> {
        Ok(self.rho(z)? < 0.0)
    }

    pub fn gradient_sup(&self, grid: usize) -> Result<f64> {
        let mut sum = 0.0;
        for b in &self.blocks {
            sum += sup_derivative_sq(&b.profile, self.truncation, grid)?;
        }
        Ok((1.0 + sum).sqrt())
    }
}

/// The data the norm estimates need from a model domain.
pub trait ModelDomain {
    fn total_dim(&self) -> usize;
    fn radial_blocks(&self) -> Vec<RadialBlock>;
    fn truncation(&self) -> f64;
    fn t0(&self) -> f64;
    fn contains(&self, z: &Point) -> Result<bool>;
    fn gradient_sup(&self, grid: usize) -> Result<f64>;
}

macro_rules! delegate_model_domain {
    ($ty:ty) => {
        impl ModelDomain for $ty {
            fn total_dim(&self) -> usize {
                <$ty>::total_dim(self)
            }
            fn radial_blocks(&self) -> Vec<RadialBlock> {
                <$ty>::radial_blocks(self)
            }
            fn truncation(&self) -> f64 {
                <$ty>::truncation(self)
            }
            fn t0(&self) -> f64 {
                <$ty>::t0(self)
            }
            fn contains(&self, z: &Point) -> Result<bool> {
                <$ty>::contains(self, z)
            }
            fn gradient_sup(&self, grid: usize) -> Result<f64> {
                <$ty>::gradient_sup(self, grid)
            }
        }
    };
}

delegate_model_domain!(DomainDescriptor);
delegate_model_domain!(ExtendedDomainDescriptor);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn quartic() -> DomainDescriptor {
        DomainDescriptor::single(ProfileFunction::power(4.0, 1.0).unwrap()).unwrap()
    }

    fn pt(z1: f64, zn: f64) -> Point {
        Point::new(vec![vec![c(z1)]], c(zn))
    }

    #[test]
    fn rho_examples() {
        let d = quartic();
        assert_relative_eq!(d.rho(&pt(0.0, 0.01)).unwrap(), -0.01);
        assert_relative_eq!(d.rho(&pt(0.1, 0.0)).unwrap(), 1e-4, max_relative = 1e-12);
        let boundary = pt(0.1, 0.1f64.powi(4));
        assert_eq!(d.rho(&boundary).unwrap(), 0.0);
        assert!(!d.contains(&boundary).unwrap());
    }

    #[test]
    fn contains_examples() {
        let d = quartic();
        assert!(d.contains(&pt(0.0, 0.01)).unwrap());
        assert!(!d.contains(&pt(0.1, 0.00005)).unwrap());
    }

    #[test]
    fn rho_outside_truncation_is_an_error() {
        assert!(matches!(quartic().rho(&pt(1.5, 0.1)), Err(Error::Range { .. })));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let z = Point::new(vec![vec![c(0.0), c(0.0)]], c(0.1));
        assert!(matches!(quartic().rho(&z), Err(Error::Input(_))));
    }

    #[test]
    fn gamma_examples() {
        let d = quartic();
        let a = ApproachSpec::radial(vec![2.0], 2.0).unwrap();
        assert!(d.gamma_contains(&a, &pt(0.0, 1e-9)).unwrap());
        assert!(d.gamma_contains(&a, &pt(0.1, 0.01)).unwrap());
        assert!(!d.gamma_contains(&a, &pt(0.1, 0.003)).unwrap());
        assert!(matches!(d.gamma_contains(&a, &pt(0.6, 0.5)), Err(Error::Range { .. })));
    }

    #[test]
    fn approach_spec_validation() {
        assert!(ApproachSpec::radial(vec![1.0], 2.0).is_err());
        assert!(ApproachSpec::radial(vec![2.0], 0.5).is_err());
        let d = quartic();
        let wrong = ApproachSpec::radial(vec![2.0, 2.0], 2.0).unwrap();
        assert!(matches!(d.approach_point(&wrong, 0.01), Err(Error::Input(_))));
    }

    #[test]
    fn approach_point_examples() {
        let d = quartic();
        let a = ApproachSpec::radial(vec![2.0], 2.0).unwrap();
        assert_eq!(d.approach_point(&a, 1e-3).unwrap(), pt(0.0, 1e-3));
        assert!(matches!(d.approach_point(&a, 1.0), Err(Error::Range { .. })));

        // Slanted path at scale 4: f(alpha |z^1|) = alpha^m t / (4 k beta),
        // inside iff alpha^m < 4.
        let inside = ApproachSpec::new(vec![1.3], 2.0, ApproachPath::Slanted { scale: 4.0 }).unwrap();
        let z = d.approach_point(&inside, 0.01).unwrap();
        let oracle = (0.01f64 / (4.0 * 2.0)).powf(0.25);
        assert_relative_eq!(z.block_parts[0][0].re, oracle, max_relative = 1e-14);
        let outside = ApproachSpec::new(vec![1.5], 2.0, ApproachPath::Slanted { scale: 4.0 }).unwrap();
        assert!(matches!(d.approach_point(&outside, 0.01), Err(Error::Path { .. })));
    }

    #[test]
    fn polydisc_radii_and_volume() {
        let d = quartic();
        let a = ApproachSpec::radial(vec![2.0], 2.0).unwrap();
        let region = d.polydisc(&a, &pt(0.0, 0.01)).unwrap();
        // r_1 = 0.5 * 0.005^{1/4}, r_n = 0.005
        let r1 = 0.5 * 0.005f64.powf(0.25);
        assert_relative_eq!(region.block_radii[0], r1, max_relative = 1e-14);
        assert_relative_eq!(region.block_radii[0], 0.1329574, max_relative = 1e-6);
        assert_relative_eq!(region.normal_radius, 0.005, max_relative = 1e-14);
        let vol_oracle = PI * PI * r1 * r1 * 0.005 * 0.005;
        assert_relative_eq!(region.volume(), vol_oracle, max_relative = 1e-14);
        assert_relative_eq!(region.volume(), 4.36180e-6, max_relative = 1e-5);
    }

    #[test]
    fn polydisc_normal_radius_grows_with_beta() {
        let d = quartic();
        let z = pt(0.0, 0.01);
        let mut last = 0.0;
        for beta in [1.5, 2.0, 4.0, 16.0, 256.0] {
            let r = d.polydisc(&ApproachSpec::radial(vec![2.0], beta).unwrap(), &z).unwrap().normal_radius;
            assert!(r > last && r < 0.01);
            last = r;
        }
    }

    #[test]
    fn polydisc_requires_cone_and_t0() {
        let d = quartic();
        let a = ApproachSpec::radial(vec![2.0], 2.0).unwrap();
        assert!(matches!(d.polydisc(&a, &pt(0.1, 0.003)), Err(Error::NotInCone(_))));
        assert!(matches!(d.polydisc(&a, &pt(0.0, 0.2)), Err(Error::NotInCone(_))));
    }

    #[test]
    fn unit_volumes() {
        let unit = |n: usize| PolydiscRegion {
            center: Point::new(vec![vec![c(0.0); n]], c(0.0)),
            block_dims: vec![n],
            block_radii: vec![1.0],
            normal_radius: 1.0,
        };
        assert_relative_eq!(unit(1).volume(), PI * PI, max_relative = 1e-15);
        assert_relative_eq!(unit(2).volume(), PI.powi(3) / 2.0, max_relative = 1e-15);
        // doubling all radii scales volume by 2^{2n}, n = 1 + n_1
        assert_relative_eq!(unit(2).scaled(2.0, 2.0).volume(), unit(2).volume() * 64.0, max_relative = 1e-14);
    }

    #[test]
    fn inclusion_and_harness_sanity() {
        let d = quartic();
        let a = ApproachSpec::radial(vec![2.0], 2.0).unwrap();
        let region = d.polydisc(&a, &pt(0.0, 0.01)).unwrap();
        assert!(d.polydisc_inclusion_check(&region, 20_000, 7).unwrap() < 0.0);
        let inflated = region.scaled(1.0, a.beta / (a.beta - 1.0) * 1.5);
        assert!(d.polydisc_inclusion_check(&inflated, 20_000, 7).unwrap() > 0.0);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(norm(&sample_ball(&mut rng, 3, 0.5)) <= 0.5);
        }
    }

    #[test]
    fn extended_rho_matches_hand_evaluation() {
        // Re z3 > exp(-1/((Re z1)^2 + (Im z2)^2)) + (Re z2)^4 + (Im z1)^2
        let blocks = vec![
            ExtendedBlock {
                coords: vec![RealCoord::re(0), RealCoord::im(1)],
                profile: ProfileFunction::exp_flat(2.0).unwrap(),
            },
            ExtendedBlock {
                coords: vec![RealCoord::re(1)],
                profile: ProfileFunction::power(4.0, 1.0).unwrap(),
            },
            ExtendedBlock {
                coords: vec![RealCoord::im(0)],
                profile: ProfileFunction::power(2.0, 1.0).unwrap(),
            },
        ];
        let d = ExtendedDomainDescriptor::new(blocks, 1.0, 0.5).unwrap();
        assert_eq!(d.total_dim(), 3);
        let z = Point::new(vec![vec![Complex64::new(0.0, 0.1), c(0.1)]], c(0.5));
        let expected = 0.0 + 0.1f64.powi(4) + 0.1f64.powi(2) - 0.5;
        assert_relative_eq!(d.rho(&z).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(d.rho(&d.axis_point(0.3)).unwrap(), -0.3);
    }

    #[test]
    fn extended_reduces_to_complex_blocks() {
        // blocks (Re z1, Im z1) with f = x^4 give the same F as the complex block
        let ext = ExtendedDomainDescriptor::new(
            vec![ExtendedBlock {
                coords: vec![RealCoord::re(0), RealCoord::im(0)],
                profile: ProfileFunction::power(4.0, 1.0).unwrap(),
            }],
            1.0,
            0.5,
        )
        .unwrap();
        let z = Point::new(vec![vec![Complex64::new(0.2, -0.3)]], c(0.05));
        assert_relative_eq!(ext.rho(&z).unwrap(), quartic().rho(&z).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn extended_rejects_bad_coverage() {
        let p = || ProfileFunction::power(2.0, 1.0).unwrap();
        let dup = vec![
            ExtendedBlock { coords: vec![RealCoord::re(0)], profile: p() },
            ExtendedBlock { coords: vec![RealCoord::re(0)], profile: p() },
        ];
        assert!(ExtendedDomainDescriptor::new(dup, 1.0, 0.5).is_err());
        let odd = vec![ExtendedBlock { coords: vec![RealCoord::re(0)], profile: p() }];
        assert!(ExtendedDomainDescriptor::new(odd, 1.0, 0.5).is_err());
    }

    #[test]
    fn real_coord_parsing() {
        assert_eq!("re1".parse::<RealCoord>().unwrap(), RealCoord::re(0));
        assert_eq!("Im z2".parse::<RealCoord>().unwrap(), RealCoord::im(1));
        assert!("x1".parse::<RealCoord>().is_err());
        assert!("re0".parse::<RealCoord>().is_err());
    }

    #[test]
    fn gradient_factor_for_quadratic_profile() {
        // |grad F| = 2r for F = |w_1|^2, maximal at r = 1
        let d = DomainDescriptor::single(ProfileFunction::power(2.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(d.gradient_sup(256).unwrap(), 5f64.sqrt(), max_relative = 1e-12);
    }
}
