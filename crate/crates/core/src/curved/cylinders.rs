//! Two parallel cylinders in the cylindrical-wave basis.
//!
//! At axial wavenumber `q` a cylinder reflects order `n` with
//! `s_n = I_n'(qR) / |K_n'(qR)|` and the translation between the axes is
//! `K_{n−k}(qD)`. The round trip splits into sectors even and odd under
//! `n → −n`; with `n, k ≥ 0`
//!
//! ```text
//! even:  c_n c_k √(s¹_n s²_k) (K_{|n−k|} + K_{n+k}),   c_0 = 1/√2, c_{n>0} = 1
//! odd:   √(s¹_n s²_k) (K_{n+k} − K_{|n−k|}),           n, k ≥ 1
//! ```
//!
//! and `φ = −(d/(2πD)) ∫₀^∞ dt Σ_sectors ln det(1 − N Nᵀ)` with `t = qD`.

use std::f64::consts::{LN_2, PI};

use super::{grow_until_converged, CylinderPair, ScatteringResult};
use crate::numerics::linalg::{logdet_one_minus_gram, logdet_one_minus_symmetric};
use crate::numerics::quadrature::semi_infinite_with;
use crate::numerics::special::{ln_bessel_k_sequence, BesselTable};
use crate::numerics::{BandedRows, ChannelTruncation};
use crate::Result;

const LN_ROW_CUT: f64 = -39.143_946_580_898_78; // ln 1e-17
const LN_ABS_CUT: f64 = LN_ROW_CUT;

#[derive(Clone, Copy)]
enum Sector {
    Even,
    Odd,
}

struct Node {
    ln_s1: Vec<f64>,
    ln_s2: Vec<f64>,
    ln_k: Vec<f64>,
    equal: bool,
}

fn ln_reflection(x: f64, n_max: usize) -> Vec<f64> {
    let t = BesselTable::new(x, n_max);
    t.ln_i_prime
        .iter()
        .zip(&t.ln_k_prime)
        .map(|(i, k)| i - k)
        .collect()
}

/// `ln(e^a + e^b)` and `ln(e^b − e^a)` for `a ≤ b`.
fn ln_sum(a: f64, b: f64) -> f64 {
    b + (a - b).exp().ln_1p()
}

fn ln_diff(a: f64, b: f64) -> f64 {
    b + (-(a - b).exp_m1()).ln()
}

impl Node {
    /// Radii in units of the center distance.
    fn new(t: f64, rho1: f64, rho2: f64, equal: bool, n_max: usize) -> Self {
        let ln_s1 = ln_reflection(t * rho1, n_max);
        let ln_s2 = if equal {
            ln_s1.clone()
        } else {
            ln_reflection(t * rho2, n_max)
        };
        Self {
            ln_s1,
            ln_s2,
            ln_k: ln_bessel_k_sequence(t, 2 * n_max),
            equal,
        }
    }

    fn ln_entry(&self, sector: Sector, n: usize, k: usize) -> f64 {
        let base = 0.5 * (self.ln_s1[n] + self.ln_s2[k]);
        let (a, b) = (self.ln_k[n.abs_diff(k)], self.ln_k[n + k]);
        match sector {
            Sector::Even => {
                let zeros = usize::from(n == 0) + usize::from(k == 0);
                base + ln_sum(a, b) - 0.5 * LN_2 * zeros as f64
            }
            Sector::Odd => base + ln_diff(a, b),
        }
    }

    fn sector(&self, sector: Sector, n_max: usize) -> BandedRows {
        let lo = match sector {
            Sector::Even => 0,
            Sector::Odd => 1,
        };
        let mut rows = BandedRows::new();
        let mut buf = Vec::new();
        for n in lo..=n_max {
            let e = |k: usize| self.ln_entry(sector, n, k);
            let mut peak = n.clamp(lo, n_max);
            let mut best = e(peak);
            while peak < n_max && e(peak + 1) > best {
                peak += 1;
                best = e(peak);
            }
            while peak > lo && e(peak - 1) > best {
                peak -= 1;
                best = e(peak);
            }
            if best < LN_ABS_CUT {
                rows.push_row(n - lo, &[]);
                continue;
            }
            let floor = (best + LN_ROW_CUT).max(LN_ABS_CUT);
            let mut a = peak;
            while a > lo && e(a - 1) >= floor {
                a -= 1;
            }
            let mut b = peak;
            while b < n_max && e(b + 1) >= floor {
                b += 1;
            }
            buf.clear();
            buf.extend((a..=b).map(|k| e(k).exp()));
            rows.push_row(a - lo, &buf);
        }
        rows
    }

    fn logdet(&self, n_max: usize) -> Result<f64> {
        let run = |s: Sector| -> Result<f64> {
            let n = self.sector(s, n_max);
            if self.equal {
                Ok(logdet_one_minus_symmetric(&n, 1.0)? + logdet_one_minus_symmetric(&n, -1.0)?)
            } else {
                logdet_one_minus_gram(&n)
            }
        };
        let (even, odd) = rayon::join(|| run(Sector::Even), || run(Sector::Odd));
        Ok(even? + odd?)
    }
}

struct Geometry {
    rho1: f64,
    rho2: f64,
    /// d / D
    gap_ratio: f64,
    equal: bool,
}

impl Geometry {
    fn new(pair: &CylinderPair) -> Self {
        // lengths in units of R₁ first, then of D
        let r2 = pair.radius_2 / pair.radius_1;
        let g = pair.gap / pair.radius_1;
        let d = g + 1.0 + r2;
        Self {
            rho1: 1.0 / d,
            rho2: r2 / d,
            gap_ratio: g / d,
            equal: pair.radius_1 == pair.radius_2,
        }
    }
}

/// `φ` at a fixed order; also returns the number of quadrature nodes.
pub(crate) fn phi_at_order(
    pair: &CylinderPair,
    n_max: usize,
    rel_tol: f64,
    max_nodes: usize,
) -> Result<(f64, usize)> {
    let g = Geometry::new(pair);
    let mut failure = None;
    let integrand = |t: f64| {
        if failure.is_some() {
            return 0.0;
        }
        match Node::new(t, g.rho1, g.rho2, g.equal, n_max).logdet(n_max) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let scale = (0.5 / g.gap_ratio).max(1.0);
    let (integral, report) = semi_infinite_with(integrand, 0.0, scale, rel_tol, 0.0, max_nodes)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((-g.gap_ratio / (2.0 * PI) * integral, report.nodes_used))
}

/// Exact `φ`, grown in the angular order until doubling changes it by less
/// than the target tolerance.
pub fn phi_exact(pair: &CylinderPair, trunc: &ChannelTruncation) -> Result<ScatteringResult> {
    let quad_tol = (1e-2 * trunc.target_rel_tol).max(1e-13);
    grow_until_converged("cylinder channel sum", pair.x(), trunc, |n| {
        phi_at_order(pair, n, quad_tol, trunc.axial_quadrature_nodes)
    })
}

/// One round trip restricted to orders `|n| ≤ 1`:
/// `(d/(2πD)) ∫dt tr(N Nᵀ)` over both sectors.
pub fn phi_single_round_trip(pair: &CylinderPair) -> Result<f64> {
    let g = Geometry::new(pair);
    let trace = |t: f64| {
        let node = Node::new(t, g.rho1, g.rho2, g.equal, 1);
        let mut s = 0.0;
        for n in 0..=1 {
            for k in 0..=1 {
                s += (2.0 * node.ln_entry(Sector::Even, n, k)).exp();
            }
        }
        s + (2.0 * node.ln_entry(Sector::Odd, 1, 1)).exp()
    };
    let (integral, _) = semi_infinite_with(trace, 0.0, 1.0, 1e-12, 0.0, 100_000)?;
    Ok(g.gap_ratio / (2.0 * PI) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curved::{phi_pfa, PHI_SSA_COEFFICIENT};
    use crate::numerics::linalg::logdet_one_minus;
    use crate::numerics::SquareMatrix;

    #[test]
    fn dipole_round_trip_coefficient() {
        for (a, b) in [(1.0, 1.0), (1.0, 2.0)] {
            let p = CylinderPair::new(a, b, 1e4, 1e9).unwrap();
            let d = p.center_distance();
            let coeff = phi_single_round_trip(&p).unwrap() * d.powi(5) / (a * a * b * b * p.gap);
            assert!((coeff / PHI_SSA_COEFFICIENT - 1.0).abs() < 1e-6, "{coeff}");
        }
    }

    #[test]
    fn sectors_reproduce_full_round_trip() {
        // Full M_in = s¹_i Σ_k K_{i−k} s²_k K_{k−n} over −n_max ..= n_max.
        let n_max = 6;
        let (rho1, rho2, t) = (0.3, 0.45, 1.7);
        let node = Node::new(t, rho1, rho2, false, n_max);
        let dim = 2 * n_max + 1;
        let idx = |i: usize| i as i64 - n_max as i64;
        let s1 = |i: i64| node.ln_s1[i.unsigned_abs() as usize].exp();
        let s2 = |i: i64| node.ln_s2[i.unsigned_abs() as usize].exp();
        let kk = |i: i64| node.ln_k[i.unsigned_abs() as usize].exp();
        let full = SquareMatrix::from_fn(dim, |i, n| {
            let (i, n) = (idx(i), idx(n));
            (0..dim)
                .map(|k| {
                    let k = idx(k);
                    s1(i) * kk(i - k) * s2(k) * kk(k - n)
                })
                .sum()
        });
        let want = logdet_one_minus(&full).unwrap();
        let got = node.logdet(n_max).unwrap();
        // the full basis couples |k| ≤ n_max on both sides, as do the sectors
        assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn actin_geometry() {
        let p = CylinderPair::new(3e-9, 3e-9, 6e-9, 15e-6).unwrap();
        let r = phi_exact(&p, &ChannelTruncation::default()).unwrap();
        assert!((r.value - 0.002_048).abs() < 2e-5, "{}", r.value);
        assert!(phi_pfa(&p) / r.value > 3.0);
    }
}
