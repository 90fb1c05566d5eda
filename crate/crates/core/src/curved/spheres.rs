//! Two spheres in the multipole basis.
//!
//! For each azimuthal number `m` the round trip is `N Nᵀ` with
//!
//! ```text
//! N_ij = √(i/(i+1)) √(j/(j+1)) (i+j)! / √((i−m)!(i+m)!(j−m)!(j+m)!)
//!        · ρ₁^{i+1/2} ρ₂^{j+1/2},      ρ_k = R_k / L,
//! ```
//!
//! `i, j ≥ max(m, 1)` and `L` the center distance. The factor `l/(l+1)` is
//! the Neumann reflection of a sphere, which removes the monopole.

use rayon::prelude::*;

use super::{grow_until_converged, ScatteringResult, SpherePair};
use crate::numerics::linalg::{logdet_one_minus_gram, logdet_one_minus_symmetric};
use crate::numerics::special::ln_factorials;
use crate::numerics::{BandedRows, ChannelTruncation, NeumaierSum};
use crate::Result;

/// Entries below this fraction of their row maximum are dropped.
const LN_ROW_CUT: f64 = -39.1439465808987777; // ln 1e-17
/// Entries below this absolute size are dropped; `N` is a contraction.
const LN_ABS_CUT: f64 = -39.1439465808987777;
/// Blocks are summed until one contributes less than this fraction.
const BLOCK_CUT: f64 = 1e-16;
const BATCH: usize = 8;

struct Kernel {
    ln_rho1: f64,
    ln_rho2: f64,
    rho2: f64,
    equal: bool,
    ln_fact: Vec<f64>,
    /// ½ ln(l/(l+1))
    half_ln_ratio: Vec<f64>,
}

impl Kernel {
    fn new(pair: &SpherePair, l_max: usize) -> Self {
        // lengths in units of R₁
        let r2 = pair.radius_2 / pair.radius_1;
        let l = pair.gap / pair.radius_1 + 1.0 + r2;
        let half_ln_ratio = (0..=l_max + 1)
            .map(|k| {
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    0.5 * (k as f64 / (k + 1) as f64).ln()
                }
            })
            .collect();
        Self {
            ln_rho1: -l.ln(),
            ln_rho2: (r2 / l).ln(),
            rho2: r2 / l,
            equal: pair.radius_1 == pair.radius_2,
            ln_fact: ln_factorials(2 * l_max + 1),
            half_ln_ratio,
        }
    }

    fn ln_entry(&self, m: usize, i: usize, j: usize) -> f64 {
        let f = &self.ln_fact;
        self.half_ln_ratio[i] + self.half_ln_ratio[j] + f[i + j]
            - 0.5 * (f[i - m] + f[i + m] + f[j - m] + f[j + m])
            + (i as f64 + 0.5) * self.ln_rho1
            + (j as f64 + 0.5) * self.ln_rho2
    }

    /// Block `m` of `N`, rows and columns `max(m,1) ..= l_max`.
    fn block(&self, m: usize, l_max: usize) -> BandedRows {
        let lo = m.max(1);
        let mut rows = BandedRows::new();
        let mut buf = Vec::new();
        for i in lo..=l_max {
            let e = |j: usize| self.ln_entry(m, i, j);
            let guess = (i as f64 * self.rho2 / (1.0 - self.rho2)).round() as usize;
            let mut peak = guess.clamp(lo, l_max);
            let mut best = e(peak);
            while peak < l_max && e(peak + 1) > best {
                peak += 1;
                best = e(peak);
            }
            while peak > lo && e(peak - 1) > best {
                peak -= 1;
                best = e(peak);
            }
            if best < LN_ABS_CUT {
                rows.push_row(i - lo, &[]);
                continue;
            }
            let floor = (best + LN_ROW_CUT).max(LN_ABS_CUT);
            let mut a = peak;
            while a > lo && e(a - 1) >= floor {
                a -= 1;
            }
            let mut b = peak;
            while b < l_max && e(b + 1) >= floor {
                b += 1;
            }
            buf.clear();
            buf.extend((a..=b).map(|j| e(j).exp()));
            rows.push_row(a - lo, &buf);
        }
        rows
    }

    /// `ln det(1 − N Nᵀ)` of block `m`.
    fn block_logdet(&self, m: usize, l_max: usize) -> Result<f64> {
        let n = self.block(m, l_max);
        if self.equal {
            Ok(logdet_one_minus_symmetric(&n, 1.0)? + logdet_one_minus_symmetric(&n, -1.0)?)
        } else {
            logdet_one_minus_gram(&n)
        }
    }
}

/// `f` at a fixed truncation `l_max`; also returns the number of blocks.
pub(crate) fn f_at_order(pair: &SpherePair, l_max: usize) -> Result<(f64, usize)> {
    let kernel = Kernel::new(pair, l_max);
    let mut acc = NeumaierSum::default();
    let mut m = 0;
    while m <= l_max {
        let end = (m + BATCH).min(l_max + 1);
        let batch: Vec<Result<f64>> = (m..end)
            .into_par_iter()
            .map(|k| kernel.block_logdet(k, l_max))
            .collect();
        let mut done = false;
        for (k, r) in (m..end).zip(batch) {
            let weight = if k == 0 { 1.0 } else { 2.0 };
            let c = -0.5 * weight * r?;
            acc.add(c);
            if k > 1 && c.abs() <= BLOCK_CUT * acc.total().abs() {
                done = true;
                m = k + 1;
                break;
            }
        }
        if done {
            break;
        }
        m = end;
    }
    Ok((acc.total(), m))
}

/// Exact `f`, grown in `ℓ_max` until doubling changes it by less than the
/// target tolerance.
pub fn f_exact(pair: &SpherePair, trunc: &ChannelTruncation) -> Result<ScatteringResult> {
    grow_until_converged("sphere multipole sum", pair.x(), trunc, |l| f_at_order(pair, l))
}

/// One round trip restricted to dipoles: `½ Σ_m w_m tr(N Nᵀ)` with `ℓ = 1`.
pub fn f_single_round_trip(pair: &SpherePair) -> f64 {
    let kernel = Kernel::new(pair, 1);
    let mut acc = NeumaierSum::default();
    for m in 0..=1 {
        let weight = if m == 0 { 1.0 } else { 2.0 };
        acc.add(0.5 * weight * (2.0 * kernel.ln_entry(m, 1, 1)).exp());
    }
    acc.total()
}
