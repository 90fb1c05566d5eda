//! Proximity (Derjaguin) sums of a planar energy per area over curved
//! surfaces.
//!
//! Two spheres: `F(d) = 2π R_eff ∫_d^∞ E(h) dh`. Two parallel cylinders, per
//! unit length: `2√(2R_eff) ∫₀^∞ E(d + s²) ds`.

use std::f64::consts::PI;

use crate::numerics::quadrature::semi_infinite_with;
use crate::Result;

/// A planar energy per area sampled on a logarithmic grid of gaps and
/// interpolated as a power law between samples. Zero beyond the last gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarProfile {
    gaps: Vec<f64>,
    values: Vec<f64>,
}

impl PlanarProfile {
    /// Samples `energy` at `per_decade` points per decade on `[lo, hi]`.
    pub fn sample(
        lo: f64,
        hi: f64,
        per_decade: usize,
        energy: impl Fn(f64) -> Result<f64> + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let decades = (hi / lo).log10().max(0.0);
        let n = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
        let gaps: Vec<f64> = (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect();
        let values = gaps
            .par_iter()
            .map(|&h| energy(h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { gaps, values })
    }

    pub fn from_samples(gaps: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(gaps.len(), values.len());
        assert!(gaps.windows(2).all(|w| w[0] < w[1]));
        Self { gaps, values }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.gaps[0], *self.gaps.last().expect("non-empty"))
    }

    fn segment(&self, h: f64) -> Option<usize> {
        let (lo, hi) = self.range();
        if !(h >= lo && h <= hi) || self.gaps.len() < 2 {
            return None;
        }
        Some(self.gaps.partition_point(|&g| g <= h).clamp(1, self.gaps.len() - 1) - 1)
    }

    /// Exponent of the power law on segment `i`, or `None` when the two end
    /// values are not of one sign.
    fn exponent(&self, i: usize) -> Option<f64> {
        let (a, b) = (self.values[i], self.values[i + 1]);
        (a * b > 0.0).then(|| (b / a).ln() / (self.gaps[i + 1] / self.gaps[i]).ln())
    }

    pub fn eval(&self, h: f64) -> f64 {
        let Some(i) = self.segment(h) else {
            return 0.0;
        };
        let (h0, h1) = (self.gaps[i], self.gaps[i + 1]);
        match self.exponent(i) {
            Some(p) => self.values[i] * (h / h0).powf(p),
            None => {
                let s = (h - h0) / (h1 - h0);
                self.values[i] * (1.0 - s) + self.values[i + 1] * s
            }
        }
    }

    /// `∫_a^b E(h) dh` within segment `i`.
    fn segment_integral(&self, i: usize, a: f64, b: f64) -> f64 {
        let h0 = self.gaps[i];
        let e0 = self.values[i];
        match self.exponent(i) {
            Some(p) if (p + 1.0).abs() > 1e-12 => {
                let q = p + 1.0;
                e0 * h0 * ((b / h0).powf(q) - (a / h0).powf(q)) / q
            }
            Some(_) => e0 * h0 * (b / a).ln(),
            None => 0.5 * (self.eval(a) + self.eval(b)) * (b - a),
        }
    }

    /// `∫_d^∞ E(h) dh`; `d` must lie within the sampled range.
    pub fn tail_integral(&self, d: f64) -> Option<f64> {
        let start = self.segment(d)?;
        let mut acc = self.segment_integral(start, d, self.gaps[start + 1]);
        for i in start + 1..self.gaps.len() - 1 {
            acc += self.segment_integral(i, self.gaps[i], self.gaps[i + 1]);
        }
        Some(acc)
    }
}

/// Energy of two spheres from a planar profile, J.
pub fn sphere_pfa(profile: &PlanarProfile, effective_radius: f64, gap: f64) -> Option<f64> {
    Some(2.0 * PI * effective_radius * profile.tail_integral(gap)?)
}

/// Energy per unit length of two parallel cylinders from a planar profile,
/// J/m.
pub fn cylinder_pfa_per_length(
    profile: &PlanarProfile,
    effective_radius: f64,
    gap: f64,
    rel_tol: f64,
) -> Result<Option<f64>> {
    if profile.segment(gap).is_none() {
        return Ok(None);
    }
    let (_, hi) = profile.range();
    let s_max = (hi - gap).max(0.0).sqrt();
    let (v, _) = semi_infinite_with(
        |s| if s < s_max { profile.eval(gap + s * s) } else { 0.0 },
        0.0,
        gap.sqrt(),
        rel_tol.max(1e-10),
        0.0,
        200_000,
    )?;
    Ok(Some(2.0 * (2.0 * effective_radius).sqrt() * v))
}
