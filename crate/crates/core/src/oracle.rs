//! Independent estimates of the Bergman kernel: Gram-matrix subspace values
//! from randomized quasi-Monte Carlo sampling, closed-form kernels of discs,
//! polydiscs and balls, and the affine transformation rule.
//!
//! For a finite dictionary `m_1..m_N` of holomorphic monomials the
//! reproducing kernel of their span is `v* G^{-1} v` with
//! `G_ab = <m_a, m_b>` and `v_a = m_a(z)`, which is at most the Bergman
//! kernel of the region.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::DomainDescriptor;

/// Eigenvalues of the equilibrated Gram matrix below `cutoff * max` are dropped.
pub const DEFAULT_CUTOFF: f64 = 1e-10;
pub const DEFAULT_BATCHES: usize = 16;
pub const MIN_ACCEPTANCE: f64 = 1e-4;
pub const MIN_SAMPLES: usize = 10_000;

/// Holomorphic monomials `w^alpha` on the ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dictionary {
    dim: usize,
    entries: Vec<Vec<u32>>,
}

impl Dictionary {
    /// All multi-indices of total degree `<= dmax`, by degree then
    /// reverse-lexicographically, so every prefix is a refinement step.
    pub fn total_degree(dim: usize, dmax: u32) -> Self {
        let mut entries = Vec::new();
        for deg in 0..=dmax {
            let mut current = vec![0u32; dim];
            push_compositions(deg, 0, &mut current, &mut entries);
        }
        Self { dim, entries }
    }

    pub fn from_entries(dim: usize, entries: Vec<Vec<u32>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Input("empty dictionary".into()));
        }
        if entries.iter().any(|e| e.len() != dim) {
            return Err(Error::Input(format!("every multi-index must have {dim} entries")));
        }
        let mut sorted = entries.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != entries.len() {
            return Err(Error::Input("dictionary entries must be distinct".into()));
        }
        Ok(Self { dim, entries })
    }

    /// The first `size` entries.
    pub fn prefix(&self, size: usize) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries[..size.min(self.entries.len())].to_vec(),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Vec<u32>] {
        &self.entries
    }

    fn max_degree(&self) -> u32 {
        self.entries.iter().flatten().copied().max().unwrap_or(0)
    }

    fn eval_into(&self, w: &[Complex64], powers: &mut [Vec<Complex64>], out: &mut [Complex64]) {
        let dmax = self.max_degree() as usize;
        for (c, p) in w.iter().zip(powers.iter_mut()) {
            p[0] = Complex64::new(1.0, 0.0);
            for d in 1..=dmax {
                p[d] = p[d - 1] * c;
            }
        }
        for (o, e) in out.iter_mut().zip(&self.entries) {
            *o = e.iter().enumerate().map(|(i, &d)| powers[i][d as usize]).product();
        }
    }

    pub fn eval(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut powers = vec![vec![Complex64::new(0.0, 0.0); self.max_degree() as usize + 1]; self.dim];
        let mut out = vec![Complex64::new(0.0, 0.0); self.size()];
        self.eval_into(w, &mut powers, &mut out);
        out
    }
}

fn push_compositions(remaining: u32, idx: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if idx == current.len() - 1 {
        current[idx] = remaining;
        out.push(current.clone());
        return;
    }
    for d in (0..=remaining).rev() {
        current[idx] = d;
        push_compositions(remaining - d, idx + 1, current, out);
    }
}

/// A bounded region that can be sampled by rejection from a box.
pub trait SampleRegion: Sync {
    fn complex_dim(&self) -> usize;
    /// `(lo, hi)` for `Re w_1, Im w_1, Re w_2, ...`.
    fn bounding_box(&self) -> Vec<(f64, f64)>;
    fn contains_point(&self, w: &[Complex64]) -> bool;
}

/// Regions with closed-form Bergman kernels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReferenceDomain {
    Disc { r: f64 },
    Polydisc { radii: Vec<f64> },
    Ball { dim: usize, r: f64 },
}

impl ReferenceDomain {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            ReferenceDomain::Disc { r } => *r > 0.0,
            ReferenceDomain::Polydisc { radii } => !radii.is_empty() && radii.iter().all(|&r| r > 0.0),
            ReferenceDomain::Ball { dim, r } => *dim >= 1 && *r > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("invalid reference domain {self:?}")))
        }
    }

    /// Image under `w -> diag(scales) w`.
    pub fn scaled(&self, scales: &[f64]) -> Result<Self> {
        if scales.len() != self.complex_dim() || scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Input(format!(
                "need {} positive scale factors, got {scales:?}",
                self.complex_dim()
            )));
        }
        Ok(match self {
            ReferenceDomain::Disc { r } => ReferenceDomain::Disc { r: r * scales[0] },
            ReferenceDomain::Polydisc { radii } => ReferenceDomain::Polydisc {
                radii: radii.iter().zip(scales).map(|(r, s)| r * s).collect(),
            },
            ReferenceDomain::Ball { dim, r } => {
                if scales.iter().any(|&s| s != scales[0]) {
                    return Err(Error::UnsupportedDomain("a ball scaled anisotropically is not a ball".into()));
                }
                ReferenceDomain::Ball { dim: *dim, r: r * scales[0] }
            }
        })
    }
}

impl SampleRegion for ReferenceDomain {
    fn complex_dim(&self) -> usize {
        match self {
            ReferenceDomain::Disc { .. } => 1,
            ReferenceDomain::Polydisc { radii } => radii.len(),
            ReferenceDomain::Ball { dim, .. } => *dim,
        }
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            ReferenceDomain::Disc { r } => vec![(-r, *r); 2],
            ReferenceDomain::Polydisc { radii } => radii.iter().flat_map(|&r| [(-r, r), (-r, r)]).collect(),
            ReferenceDomain::Ball { dim, r } => vec![(-r, *r); 2 * dim],
        }
    }

    fn contains_point(&self, w: &[Complex64]) -> bool {
        match self {
            ReferenceDomain::Disc { r } => w[0].norm_sqr() < r * r,
            ReferenceDomain::Polydisc { radii } => w.iter().zip(radii).all(|(c, r)| c.norm_sqr() < r * r),
            ReferenceDomain::Ball { r, .. } => w.iter().map(|c| c.norm_sqr()).sum::<f64>() < r * r,
        }
    }
}

/// Coordinates are the block parts of `z'` in order, then `z_n`.
impl SampleRegion for DomainDescriptor {
    fn complex_dim(&self) -> usize {
        self.total_dim()
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        let t = self.truncation();
        let mut b = vec![(-t, t); 2 * (self.total_dim() - 1)];
        b.push((0.0, t));
        b.push((-t, t));
        b
    }

    fn contains_point(&self, w: &[Complex64]) -> bool {
        let t = self.truncation();
        let mut offset = 0;
        let mut total = 0.0;
        for b in self.blocks() {
            let r = crate::geometry::norm(&w[offset..offset + b.dim]);
            offset += b.dim;
            if r > t {
                return false;
            }
            match b.profile.eval(r) {
                Ok(v) => total += v,
                Err(_) => return false,
            }
        }
        let z_n = w[offset];
        total < z_n.re && z_n.re <= t && z_n.im.abs() <= t
    }
}

/// Bergman kernel on the diagonal of a reference region.
pub fn exact_kappa_reference(kind: &ReferenceDomain, z: &[Complex64]) -> Result<f64> {
    kind.validate()?;
    if z.len() != kind.complex_dim() {
        return Err(Error::Input(format!("point has {} coordinates, expected {}", z.len(), kind.complex_dim())));
    }
    if !kind.contains_point(z) {
        return Err(Error::range("|z|", crate::geometry::norm(z), "interior of the reference domain"));
    }
    let disc = |r: f64, c: Complex64| r * r / (PI * (r * r - c.norm_sqr()).powi(2));
    Ok(match kind {
        ReferenceDomain::Disc { r } => disc(*r, z[0]),
        ReferenceDomain::Polydisc { radii } => radii.iter().zip(z).map(|(&r, &c)| disc(r, c)).product(),
        ReferenceDomain::Ball { dim, r } => {
            let m = *dim as i32;
            let fact: f64 = (1..=*dim).map(|i| i as f64).product();
            let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            fact / PI.powi(m) * r * r / (r * r - s).powi(m + 1)
        }
    })
}

/// Seeded randomized-QMC draws from a region, kept per batch so that the
/// same samples can be reused across dictionaries.
#[derive(Clone, Debug)]
pub struct SampleSet {
    batches: Vec<Vec<Vec<Complex64>>>,
    draws_per_batch: usize,
    box_volume: f64,
    pub mc_samples: usize,
    pub accepted: usize,
    pub seed: u64,
}

/// Generator of the `R_d` Kronecker sequence: `frac(k / phi_d^i)` with
/// `phi_d^{d+1} = phi_d + 1`.
fn kronecker_alpha(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|i| phi.powi(-(i as i32)).fract()).collect()
}

impl SampleSet {
    /// `mc_samples` box draws split into `batches` Kronecker blocks, each
    /// with its own uniform random shift from the stream `b` of `seed`.
    pub fn draw<R: SampleRegion + ?Sized>(region: &R, mc_samples: usize, seed: u64, batches: usize) -> Result<Self> {
        if mc_samples < MIN_SAMPLES {
            return Err(Error::range("mc_samples", mc_samples as f64, format!("[{MIN_SAMPLES}, inf)")));
        }
        if batches < 2 {
            return Err(Error::range("batches", batches as f64, "[2, inf)"));
        }
        let bbox = region.bounding_box();
        let d = bbox.len();
        let alpha = kronecker_alpha(d);
        let per = mc_samples / batches;
        let box_volume: f64 = bbox.iter().map(|(lo, hi)| hi - lo).product();
        let sets: Vec<Vec<Vec<Complex64>>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let mut pts = Vec::new();
                let mut x = vec![0.0; d];
                for k in 0..per {
                    for i in 0..d {
                        let u = (shift[i] + k as f64 * alpha[i]).fract();
                        x[i] = bbox[i].0 + u * (bbox[i].1 - bbox[i].0);
                    }
                    let w: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                    if region.contains_point(&w) {
                        pts.push(w);
                    }
                }
                pts
            })
            .collect();
        let accepted: usize = sets.iter().map(Vec::len).sum();
        let total = per * batches;
        let rate = accepted as f64 / total as f64;
        if rate < MIN_ACCEPTANCE {
            return Err(Error::Sampling {
                rate,
                min_rate: MIN_ACCEPTANCE,
            });
        }
        Ok(Self {
            batches: sets,
            draws_per_batch: per,
            box_volume,
            mc_samples: total,
            accepted,
            seed,
        })
    }

    fn batch_grams(&self, dict: &Dictionary) -> Vec<DMatrix<Complex64>> {
        let n = dict.size();
        let weight = self.box_volume / self.draws_per_batch as f64;
        self.batches
            .par_iter()
            .map(|pts| {
                let mut g = DMatrix::<Complex64>::zeros(n, n);
                let mut powers = vec![vec![Complex64::new(0.0, 0.0); dict.max_degree() as usize + 1]; dict.dim()];
                let mut m = vec![Complex64::new(0.0, 0.0); n];
                for w in pts {
                    dict.eval_into(w, &mut powers, &mut m);
                    for b in 0..n {
                        let mb = m[b].conj();
                        for a in b..n {
                            g[(a, b)] += m[a] * mb;
                        }
                    }
                }
                for b in 0..n {
                    for a in b..n {
                        g[(a, b)] *= weight;
                        g[(b, a)] = g[(a, b)].conj();
                    }
                }
                g
            })
            .collect()
    }

    /// Subspace kernel `v* G^+ v` with a jackknife standard error over batches.
    pub fn estimate(&self, dict: &Dictionary, z: &[Complex64], cutoff: f64) -> Result<GramEstimate> {
        if z.len() != dict.dim() {
            return Err(Error::Input(format!("point has {} coordinates, dictionary {}", z.len(), dict.dim())));
        }
        let grams = self.batch_grams(dict);
        let v = DVector::from_vec(dict.eval(z));
        let nb = grams.len() as f64;
        let total: DMatrix<Complex64> = grams.iter().fold(DMatrix::zeros(dict.size(), dict.size()), |acc, g| acc + g);
        let (value, condition_diag) = subspace_kernel(&(&total / Complex64::new(nb, 0.0)), &v, cutoff)?;
        let mut loo = Vec::with_capacity(grams.len());
        for g in &grams {
            let m = (&total - g) / Complex64::new(nb - 1.0, 0.0);
            loo.push(subspace_kernel(&m, &v, cutoff)?.0);
        }
        let mean = loo.iter().sum::<f64>() / nb;
        let var = (nb - 1.0) / nb * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        Ok(GramEstimate {
            value,
            standard_error: var.sqrt(),
            dictionary_size: dict.size(),
            mc_samples: self.mc_samples,
            accepted: self.accepted,
            seed: self.seed,
            condition_diag,
            cutoff,
        })
    }
}

/// `v* G^+ v` after symmetric diagonal scaling; returns the value and the
/// smallest retained eigenvalue of the scaled matrix.
fn subspace_kernel(g: &DMatrix<Complex64>, v: &DVector<Complex64>, cutoff: f64) -> Result<(f64, f64)> {
    let n = g.nrows();
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / g[(i, i)].re.max(f64::MIN_POSITIVE).sqrt()).collect();
    let gs = DMatrix::from_fn(n, n, |a, b| g[(a, b)] * scale[a] * scale[b]);
    let vs = DVector::from_fn(n, |a, _| v[a] * scale[a]);
    let eig = gs.symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::DegenerateDictionary);
    }
    let mut value = 0.0;
    let mut smallest = f64::INFINITY;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff * max {
            let u = eig.eigenvectors.column(i);
            value += u.dotc(&vs).norm_sqr() / lambda;
            smallest = smallest.min(lambda);
        }
    }
    if !smallest.is_finite() {
        return Err(Error::DegenerateDictionary);
    }
    Ok((value, smallest))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub dictionary_size: usize,
    pub mc_samples: usize,
    pub accepted: usize,
    pub seed: u64,
    /// Smallest retained eigenvalue of the equilibrated Gram matrix.
    pub condition_diag: f64,
    pub cutoff: f64,
}

impl GramEstimate {
    pub fn relative_error(&self) -> f64 {
        self.standard_error / self.value
    }
}

/// Subspace estimate of the Bergman kernel of `region` at `z`.
pub fn gram_kappa<R: SampleRegion + ?Sized>(
    region: &R,
    z: &[Complex64],
    dictionary: &Dictionary,
    mc_samples: usize,
    seed: u64,
) -> Result<GramEstimate> {
    if !region.contains_point(z) {
        return Err(Error::Input("gram_kappa point is outside the region".into()));
    }
    let samples = SampleSet::draw(region, mc_samples, seed, DEFAULT_BATCHES)?;
    samples.estimate(dictionary, z, DEFAULT_CUTOFF)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformationCheck {
    /// `|I_0(z) |det J|^2 - I_0'(Jz)| / I_0'(Jz)`.
    pub discrepancy: f64,
    /// Propagated standard error of the discrepancy; zero for closed forms.
    pub standard_error: f64,
}

fn scale_point(z: &[Complex64], scales: &[f64]) -> Vec<Complex64> {
    z.iter().zip(scales).map(|(c, s)| c * s).collect()
}

/// Transformation rule for `w -> diag(scales) w` with closed-form kernels.
pub fn transformation_check(kind: &ReferenceDomain, scales: &[f64], z: &[Complex64]) -> Result<TransformationCheck> {
    let image = kind.scaled(scales)?;
    let det_sq: f64 = scales.iter().map(|s| s * s).product();
    let i0 = 1.0 / exact_kappa_reference(kind, z)?;
    let i0_image = 1.0 / exact_kappa_reference(&image, &scale_point(z, scales))?;
    Ok(TransformationCheck {
        discrepancy: (i0 * det_sq - i0_image).abs() / i0_image,
        standard_error: 0.0,
    })
}

/// Transformation rule with both sides estimated by [`gram_kappa`] from
/// independent sample streams.
pub fn transformation_check_gram(
    kind: &ReferenceDomain,
    scales: &[f64],
    z: &[Complex64],
    dictionary: &Dictionary,
    mc_samples: usize,
    seed: u64,
) -> Result<TransformationCheck> {
    let image = kind.scaled(scales)?;
    let det_sq: f64 = scales.iter().map(|s| s * s).product();
    let a = gram_kappa(kind, z, dictionary, mc_samples, seed)?;
    let b = gram_kappa(&image, &scale_point(z, scales), dictionary, mc_samples, seed.wrapping_add(1))?;
    // I_0 = 1/kappa, so I_0 |det J|^2 / I_0' = kappa' |det J|^2 / kappa
    let ratio = b.value * det_sq / a.value;
    Ok(TransformationCheck {
        discrepancy: (ratio - 1.0).abs(),
        standard_error: ratio * (a.relative_error().powi(2) + b.relative_error().powi(2)).sqrt(),
    })
}
