//! Distance at which the universal binding energy equals a multiple of k_BT.

use serde::{Deserialize, Serialize};

use crate::curved::{f_exact, phi_exact, CylinderPair, SpherePair};
use crate::numerics::ChannelTruncation;
use crate::{CasimirError, Result};

/// Relative width of the final bracket; three significant figures.
const BRACKET_REL: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum CrossoverFamily {
    Spheres { radius_1: f64, radius_2: f64 },
    /// Parallel cylinders whose length is tied to the gap, `L = ratio · d`.
    Cylinders {
        radius_1: f64,
        radius_2: f64,
        length_over_gap: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossover {
    /// Surface distance, m.
    pub gap: f64,
    /// `d / R_eff`.
    pub x: f64,
    /// `f` or `φ` at the crossover.
    pub scattering: f64,
    /// `|F| / k_BT` at the crossover.
    pub energy_kbt: f64,
    pub evaluations: usize,
}

impl CrossoverFamily {
    fn effective_radius(&self) -> f64 {
        let (a, b) = match *self {
            CrossoverFamily::Spheres { radius_1, radius_2 }
            | CrossoverFamily::Cylinders {
                radius_1, radius_2, ..
            } => (radius_1, radius_2),
        };
        a * b / (a + b)
    }

    /// `(|F|/k_BT, f or φ)` at gap `d`.
    fn energy(&self, d: f64, trunc: &ChannelTruncation) -> Result<(f64, f64)> {
        match *self {
            CrossoverFamily::Spheres { radius_1, radius_2 } => {
                let f = f_exact(&SpherePair::new(radius_1, radius_2, d)?, trunc)?.value;
                Ok((f, f))
            }
            CrossoverFamily::Cylinders {
                radius_1,
                radius_2,
                length_over_gap,
            } => {
                let pair = CylinderPair::new(radius_1, radius_2, d, length_over_gap * d)?;
                let phi = phi_exact(&pair, trunc)?.value;
                Ok((length_over_gap * phi, phi))
            }
        }
    }
}

/// Bisection in `ln d` for `|F(d)| = threshold · k_BT`, assuming `|F|`
/// decreases with the gap.
pub fn crossover_finder(
    family: CrossoverFamily,
    threshold: f64,
    trunc: &ChannelTruncation,
) -> Result<Crossover> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CasimirError::Domain(format!("threshold must be positive, got {threshold}")));
    }
    if let CrossoverFamily::Cylinders { length_over_gap, .. } = family {
        if !(length_over_gap.is_finite() && length_over_gap > 0.0) {
            return Err(CasimirError::Domain("length_over_gap must be positive".into()));
        }
    }
    let reff = family.effective_radius();
    let mut evaluations = 0;
    let mut eval = |d: f64| {
        evaluations += 1;
        family.energy(d, trunc)
    };

    // bracket: energy(lo) > threshold > energy(hi)
    let mut lo = 0.1 * reff;
    let mut e_lo = eval(lo)?;
    let mut hi = lo;
    let mut e_hi = e_lo;
    let step = 2.0;
    for _ in 0..40 {
        if e_lo.0 > threshold && e_hi.0 <= threshold {
            break;
        }
        if e_lo.0 <= threshold {
            hi = lo;
            e_hi = e_lo;
            lo /= step;
            e_lo = eval(lo)?;
        } else {
            lo = hi;
            e_lo = e_hi;
            hi *= step;
            e_hi = eval(hi)?;
        }
    }
    if !(e_lo.0 > threshold && e_hi.0 <= threshold) {
        return Err(CasimirError::Domain(format!(
            "could not bracket |F| = {threshold} k_BT"
        )));
    }
    while hi / lo - 1.0 > BRACKET_REL {
        let mid = (lo * hi).sqrt();
        let e = eval(mid)?;
        if e.0 > threshold {
            lo = mid;
            e_lo = e;
        } else {
            hi = mid;
            e_hi = e;
        }
    }
    // closer end of the bracket
    let (gap, e) = if (e_lo.0 - threshold).abs() < (e_hi.0 - threshold).abs() {
        (lo, e_lo)
    } else {
        (hi, e_hi)
    };
    Ok(Crossover {
        gap,
        x: gap / reff,
        scattering: e.1,
        energy_kbt: e.0,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinders_at_fixed_aspect() {
        let c = crossover_finder(
            CrossoverFamily::Cylinders {
                radius_1: 1.0,
                radius_2: 1.0,
                length_over_gap: 1000.0,
            },
            1.0,
            &ChannelTruncation::default(),
        )
        .unwrap();
        assert!((c.scattering / 1e-3 - 1.0).abs() < 1e-2, "{c:?}");
        assert!((c.energy_kbt - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_threshold() {
        let fam = CrossoverFamily::Spheres {
            radius_1: 1.0,
            radius_2: 1.0,
        };
        assert!(crossover_finder(fam, 0.0, &ChannelTruncation::default()).is_err());
    }
}
