//! Universal zero-frequency Casimir functions for two spheres (`f`) and two
//! parallel cylinders (`φ`).
//!
//! Both are log-determinants of `1 − M` with `M` the round-trip operator of
//! the Laplace problem with Neumann conditions on the bodies, which is the
//! limit the diverging ionic response of the electrolyte produces in the
//! zero-frequency TM channel.

mod cylinders;
mod spheres;
mod table;

use serde::{Deserialize, Serialize};

use crate::constants::ZETA3;
use crate::thermal::ThermalContext;
use crate::{CasimirError, ConvergenceReport, Result};

pub use crate::numerics::ChannelTruncation;
pub use cylinders::{phi_exact, phi_single_round_trip};
pub use spheres::{f_exact, f_single_round_trip};
pub use table::{CylinderTable, SphereTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePair {
    pub radius_1: f64,
    pub radius_2: f64,
    /// Surface-to-surface distance, m.
    pub gap: f64,
}

impl SpherePair {
    pub fn new(radius_1: f64, radius_2: f64, gap: f64) -> Result<Self> {
        for (name, v) in [("radius_1", radius_1), ("radius_2", radius_2), ("gap", gap)] {
            check_length(name, v)?;
        }
        Ok(Self {
            radius_1,
            radius_2,
            gap,
        })
    }

    /// Equal radii `r` at aspect ratio `x = d/R_eff`.
    pub fn equal(radius: f64, x: f64) -> Result<Self> {
        Self::new(radius, radius, 0.5 * x * radius)
    }

    pub fn effective_radius(&self) -> f64 {
        self.radius_1 * self.radius_2 / (self.radius_1 + self.radius_2)
    }

    /// `x = d / R_eff`.
    pub fn x(&self) -> f64 {
        self.gap / self.effective_radius()
    }

    /// `u = R₁R₂/(R₁+R₂)²`.
    pub fn u(&self) -> f64 {
        let s = self.radius_1 + self.radius_2;
        self.radius_1 * self.radius_2 / (s * s)
    }

    /// Center-to-center distance.
    pub fn center_distance(&self) -> f64 {
        self.gap + self.radius_1 + self.radius_2
    }

    pub fn swapped(&self) -> Self {
        Self {
            radius_1: self.radius_2,
            radius_2: self.radius_1,
            gap: self.gap,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            radius_1: self.radius_1 * factor,
            radius_2: self.radius_2 * factor,
            gap: self.gap * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPair {
    pub radius_1: f64,
    pub radius_2: f64,
    pub gap: f64,
    pub length: f64,
}

impl CylinderPair {
    pub fn new(radius_1: f64, radius_2: f64, gap: f64, length: f64) -> Result<Self> {
        for (name, v) in [
            ("radius_1", radius_1),
            ("radius_2", radius_2),
            ("gap", gap),
            ("length", length),
        ] {
            check_length(name, v)?;
        }
        let pair = Self {
            radius_1,
            radius_2,
            gap,
            length,
        };
        if let Some(w) = pair.length_warning() {
            log::warn!("{w}");
        }
        Ok(pair)
    }

    pub fn effective_radius(&self) -> f64 {
        self.radius_1 * self.radius_2 / (self.radius_1 + self.radius_2)
    }

    pub fn x(&self) -> f64 {
        self.gap / self.effective_radius()
    }

    pub fn center_distance(&self) -> f64 {
        self.gap + self.radius_1 + self.radius_2
    }

    /// The per-length formula assumes `L ≫ d`.
    pub fn length_warning(&self) -> Option<String> {
        (self.length < 10.0 * self.gap).then(|| {
            format!(
                "cylinder length {:.3e} m is less than ten gaps ({:.3e} m); end effects are ignored",
                self.length, self.gap
            )
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            radius_1: self.radius_2,
            radius_2: self.radius_1,
            ..*self
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            radius_1: self.radius_1 * factor,
            radius_2: self.radius_2 * factor,
            gap: self.gap * factor,
            length: self.length * factor,
        }
    }
}

/// Converged value of `f` or `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub value: f64,
    /// Angular order of the returned value.
    pub angular_order: usize,
    /// Relative change against the value at half the order.
    pub report: ConvergenceReport,
}

/// `ζ(3) R_eff / (8d)`.
pub fn f_pfa(pair: &SpherePair) -> f64 {
    ZETA3 / (8.0 * pair.x())
}

/// `3R₁³R₂³ / (4d⁶)` with `d` the surface distance.
pub fn f_ssa(pair: &SpherePair) -> f64 {
    0.75 * (pair.radius_1 * pair.radius_2 / (pair.gap * pair.gap)).powi(3)
}

/// Dipole asymptote written with the center distance `L`,
/// `3R₁³R₂³ / (4L⁶)`, which is the leading term of the exact function.
pub fn f_ssa_center(pair: &SpherePair) -> f64 {
    let l = pair.center_distance();
    0.75 * (pair.radius_1 * pair.radius_2 / (l * l)).powi(3)
}

/// `(ζ(3)/32) √(2R_eff/d)`.
pub fn phi_pfa(pair: &CylinderPair) -> f64 {
    ZETA3 / 32.0 * (2.0 / pair.x()).sqrt()
}

/// `(891π/4096) R₁²R₂² / d⁴`.
pub fn phi_ssa(pair: &CylinderPair) -> f64 {
    let r = pair.radius_1 * pair.radius_2 / (pair.gap * pair.gap);
    PHI_SSA_COEFFICIENT * r * r
}

/// `(891π/4096) R₁²R₂² d / D⁵` with the center distance `D`.
pub fn phi_ssa_center(pair: &CylinderPair) -> f64 {
    let d = pair.center_distance();
    let r = pair.radius_1 * pair.radius_2 / (d * d);
    PHI_SSA_COEFFICIENT * r * r * pair.gap / d
}

pub const F_SSA_COEFFICIENT: f64 = 0.75;
pub const PHI_SSA_COEFFICIENT: f64 = 891.0 * std::f64::consts::PI / 4096.0;

/// Conformal parameter `1 + x(1 + ux/2)`, equal to
/// `((d+R₁+R₂)² − R₁² − R₂²)/(2R₁R₂)`.
pub fn conformal_parameter(pair: &SpherePair) -> f64 {
    let x = pair.x();
    1.0 + x * (1.0 + 0.5 * pair.u() * x)
}

/// `((d+R₁+R₂)² + R₁² + R₂²)/(2R₁R₂)`, which exceeds
/// [`conformal_parameter`] by `1/u − 2`.
pub fn conformal_parameter_plus_form(pair: &SpherePair) -> f64 {
    let l = pair.center_distance();
    let (a, b) = (pair.radius_1, pair.radius_2);
    (l * l + a * a + b * b) / (2.0 * a * b)
}

/// The same quantity as [`conformal_parameter`], from the center distance.
pub fn conformal_parameter_minus_form(pair: &SpherePair) -> f64 {
    let l = pair.center_distance();
    let (a, b) = (pair.radius_1, pair.radius_2);
    (l * l - a * a - b * b) / (2.0 * a * b)
}

/// Interpolant `1/(1/f_pfa + 1/f_ssa)` between the two asymptotes, using the
/// center-distance dipole form. Approximate.
pub fn f_interpolated(pair: &SpherePair) -> f64 {
    1.0 / (1.0 / f_pfa(pair) + 1.0 / f_ssa_center(pair))
}

/// Cylinder counterpart of [`f_interpolated`].
pub fn phi_interpolated(pair: &CylinderPair) -> f64 {
    1.0 / (1.0 / phi_pfa(pair) + 1.0 / phi_ssa_center(pair))
}

/// `−k_BT f`.
pub fn sphere_universal_energy(
    pair: &SpherePair,
    ctx: &ThermalContext,
    trunc: &ChannelTruncation,
) -> Result<(f64, ScatteringResult)> {
    let f = f_exact(pair, trunc)?;
    Ok((-ctx.thermal_energy() * f.value, f))
}

/// `−k_BT (L/d) φ`.
pub fn cylinder_universal_energy(
    pair: &CylinderPair,
    ctx: &ThermalContext,
    trunc: &ChannelTruncation,
) -> Result<(f64, ScatteringResult)> {
    let mut phi = phi_exact(pair, trunc)?;
    if let Some(w) = pair.length_warning() {
        phi.report.flag(w);
    }
    Ok((-ctx.thermal_energy() * pair.length / pair.gap * phi.value, phi))
}

fn check_length(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CasimirError::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Runs `at(order)` at doubling orders until two successive values agree to
/// the target tolerance.
pub(crate) fn grow_until_converged(
    what: &str,
    x: f64,
    trunc: &ChannelTruncation,
    mut at: impl FnMut(usize) -> Result<(f64, usize)>,
) -> Result<ScatteringResult> {
    trunc.validate()?;
    let mut order = trunc.initial_order(x);
    let (mut prev, mut nodes) = at(order)?;
    loop {
        let next = 2 * order;
        if next > trunc.order_budget {
            let mut report = ConvergenceReport {
                nodes_used: nodes,
                terms_used: order,
                achieved_rel_err: f64::NAN,
                ..Default::default()
            };
            report.flag(format!("order budget {} reached", trunc.order_budget));
            return Err(CasimirError::NonConvergence {
                what: what.into(),
                estimate: prev,
                report,
            });
        }
        let (value, n) = at(next)?;
        nodes += n;
        let err = if value != 0.0 {
            ((value - prev) / value).abs()
        } else {
            (value - prev).abs()
        };
        if err < trunc.target_rel_tol || !trunc.auto_grow {
            let mut report = ConvergenceReport {
                achieved_rel_err: err,
                nodes_used: nodes,
                terms_used: next,
                ..Default::default()
            };
            if err >= trunc.target_rel_tol {
                report.flag(format!(
                    "order {next} differs from order {order} by {err:.2e}; auto_grow is off"
                ));
            }
            return Ok(ScatteringResult {
                value,
                angular_order: next,
                report,
            });
        }
        prev = value;
        order = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derived_quantities() {
        let p = SpherePair::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(p.x(), 1.0);
        assert_eq!(p.u(), 0.25);
        assert!((f_pfa(&p) - 0.150_257_112_894_949_29).abs() < 1e-15);
        assert_eq!(conformal_parameter(&p), 2.125);
        assert!((conformal_parameter_minus_form(&p) - 2.125).abs() < 1e-14);
        let touching = SpherePair::new(1.0, 1.0, 1e-300).unwrap();
        assert!((conformal_parameter_plus_form(&touching) - 3.0).abs() < 1e-14);
        let x0 = SpherePair::equal(1.0, 0.0).err();
        assert!(x0.is_some());
    }

    #[test]
    fn conformal_forms_differ_by_constant() {
        for (a, b, d) in [(1.0, 2.0, 0.3), (2.4e-6, 12e-6, 0.2e-6), (1.0, 3.0, 7.0)] {
            let p = SpherePair::new(a, b, d).unwrap();
            let diff = conformal_parameter_plus_form(&p) - conformal_parameter(&p);
            assert!((diff - (1.0 / p.u() - 2.0)).abs() < 1e-12 * diff.abs().max(1.0));
            let rel = conformal_parameter_minus_form(&p) / conformal_parameter(&p) - 1.0;
            assert!(rel.abs() < 1e-12);
        }
    }

    #[test]
    fn asymptote_values() {
        let p = SpherePair::equal(1.0, 20.0).unwrap();
        assert!((f_ssa(&p) - 7.5e-7).abs() < 1e-20);
        let c = CylinderPair::new(1.0, 1.0, 2.0, 1e4).unwrap();
        assert!((phi_ssa(&c) - 0.042_711_777_562_690_82).abs() < 1e-15);
        assert!((phi_pfa(&c) - 0.026_561_955_862_382_82).abs() < 1e-15);
        assert_eq!(phi_ssa(&c.swapped()), phi_ssa(&c));
        let q = SpherePair::new(1.0, 3.0, 0.7).unwrap();
        assert_eq!(f_ssa(&q), f_ssa(&q.swapped()));
        let far = SpherePair::new(1.0, 3.0, 1.4).unwrap();
        assert!((f_ssa(&far) / f_ssa(&q) - 2f64.powi(-6)).abs() < 1e-15);
    }

    #[test]
    fn length_warning() {
        assert!(CylinderPair::new(1.0, 1.0, 1.0, 5.0).unwrap().length_warning().is_some());
        assert!(CylinderPair::new(1.0, 1.0, 1.0, 50.0).unwrap().length_warning().is_none());
    }

    /// `f` at conformal parameter `y` for radius ratio `r`, with `y` read in
    /// the given form; `None` when the form cannot reach `y`.
    fn f_at_y(r: f64, y: f64, plus_form: bool) -> Option<f64> {
        let u = r / ((1.0 + r) * (1.0 + r));
        let y = if plus_form { y - (1.0 / u - 2.0) } else { y };
        if y <= 1.0 {
            return None;
        }
        let x = ((1.0 + 2.0 * u * (y - 1.0)).sqrt() - 1.0) / u;
        let p = SpherePair::new(1.0, r, x * r / (1.0 + r)).unwrap();
        if plus_form {
            assert!((conformal_parameter_plus_form(&p) / (y + 1.0 / u - 2.0) - 1.0).abs() < 1e-12);
        } else {
            assert!((conformal_parameter_minus_form(&p) / y - 1.0).abs() < 1e-12);
        }
        Some(f_exact(&p, &ChannelTruncation::default()).unwrap().value)
    }

    fn spread(values: &[f64]) -> f64 {
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        max / min - 1.0
    }

    #[test]
    fn conformal_collapse_uses_minus_form() {
        for y in [1.5, 2.0, 3.0, 5.0, 7.0, 10.0] {
            let f: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&r| f_at_y(r, y, false).unwrap()).collect();
            assert!(spread(&f) < 0.1, "y = {y}: {f:?}");
        }
        // the plus form cannot reach y < 1/u - 1 and does not collapse beyond it
        assert!(f_at_y(3.0, 3.0, true).is_none());
        for y in [5.0, 7.0, 10.0] {
            let f: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&r| f_at_y(r, y, true).unwrap()).collect();
            assert!(spread(&f) > 0.5, "y = {y}: {f:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn symmetric_and_scale_free(
            r in 0.3f64..3.0,
            log_x in -0.3f64..1.3,
            scale in prop::sample::select(vec![1e-9, 1e-6, 10.0, 1e3]),
        ) {
            let trunc = ChannelTruncation::default();
            let x = 10f64.powf(log_x);
            let gap = x * r / (1.0 + r);
            let s = SpherePair::new(1.0, r, gap).unwrap();
            let f = f_exact(&s, &trunc).unwrap().value;
            prop_assert!(f > 0.0);
            prop_assert!((f_exact(&s.swapped(), &trunc).unwrap().value / f - 1.0).abs() < 1e-10);
            prop_assert!((f_exact(&s.scaled(scale), &trunc).unwrap().value / f - 1.0).abs() < 1e-10);

            let c = CylinderPair::new(1.0, r, gap, 1e3).unwrap();
            let phi = phi_exact(&c, &trunc).unwrap().value;
            prop_assert!(phi > 0.0);
            prop_assert!((phi_exact(&c.swapped(), &trunc).unwrap().value / phi - 1.0).abs() < 1e-10);
            prop_assert!((phi_exact(&c.scaled(scale), &trunc).unwrap().value / phi - 1.0).abs() < 1e-10);
        }
    }
}
