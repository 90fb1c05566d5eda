//! Temperature bookkeeping and the Matsubara spectrum.

use std::f64::consts::PI;

use crate::constants::{BOLTZMANN, HBAR};
use crate::{CasimirError, Result};

/// Temperature together with the derived thermal energy and first Matsubara
/// frequency. Construct with [`ThermalContext::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalContext {
    temperature: f64,
    thermal_energy: f64,
    first_matsubara: f64,
}

impl ThermalContext {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(CasimirError::Domain(format!(
                "temperature must be positive, got {temperature} K"
            )));
        }
        let thermal_energy = BOLTZMANN * temperature;
        Ok(Self {
            temperature,
            thermal_energy,
            first_matsubara: 2.0 * PI * thermal_energy / HBAR,
        })
    }

    /// Temperature in kelvin.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// k_B T in joule.
    pub fn thermal_energy(&self) -> f64 {
        self.thermal_energy
    }

    /// ξ₁ = 2π k_B T / ħ in rad/s.
    pub fn first_matsubara(&self) -> f64 {
        self.first_matsubara
    }

    /// ξ_n = n ξ₁.
    pub fn matsubara_frequency(&self, n: u32) -> f64 {
        f64::from(n) * self.first_matsubara
    }

    /// Mean energy of a field mode including the zero-point term,
    /// `(ħω/2) coth(ħω / 2k_BT)`.
    ///
    /// The ω → 0 divergence of the occupation number is treated analytically
    /// by the zero-frequency terms, so ω must be strictly positive here.
    pub fn mean_mode_energy(&self, omega: f64) -> Result<f64> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(CasimirError::Domain(format!(
                "mode frequency must be positive, got {omega} rad/s"
            )));
        }
        let half = 0.5 * HBAR * omega;
        let y = half / self.thermal_energy;
        // k_BT · y coth y, written so that y → 0 stays accurate
        Ok(self.thermal_energy * y / y.tanh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_nonpositive_temperature() {
        assert!(ThermalContext::new(0.0).is_err());
        assert!(ThermalContext::new(-3.0).is_err());
        assert!(ThermalContext::new(f64::NAN).is_err());
    }

    #[test]
    fn first_matsubara_at_300k() {
        let ctx = ThermalContext::new(300.0).unwrap();
        assert_eq!(ctx.matsubara_frequency(0), 0.0);
        // 2π k_B T/ħ evaluated with mpmath at 50 digits
        let expected = 2.467_790_255_153_060_5e14;
        assert!((ctx.matsubara_frequency(1) / expected - 1.0).abs() < 1e-12);
        assert_eq!(ctx.matsubara_frequency(10), 10.0 * ctx.matsubara_frequency(1));
    }

    #[test]
    fn mode_energy_limits() {
        let ctx = ThermalContext::new(300.0).unwrap();
        let kt = ctx.thermal_energy();
        let omega = |ratio: f64| ratio * kt / HBAR;

        let e = ctx.mean_mode_energy(omega(20.0)).unwrap();
        assert!((e / (0.5 * HBAR * omega(20.0)) - 1.0).abs() < 1e-8);

        let e = ctx.mean_mode_energy(omega(0.01)).unwrap();
        assert!((e / kt - 1.0).abs() < 1e-4);

        let w = omega(2.0);
        let e = ctx.mean_mode_energy(w).unwrap();
        let coth1 = 1.313_035_285_499_331_3;
        assert!((e / (coth1 * 0.5 * HBAR * w) - 1.0).abs() < 1e-14);

        assert!(ctx.mean_mode_energy(0.0).is_err());
    }

    proptest! {
        #[test]
        fn matsubara_frequencies_add(t in 1.0f64..1e4, n in 0u32..1_000_000, m in 0u32..1_000_000) {
            let ctx = ThermalContext::new(t).unwrap();
            let whole = ctx.matsubara_frequency(n + m);
            let parts = ctx.matsubara_frequency(n) + ctx.matsubara_frequency(m);
            prop_assert!(whole.to_bits().abs_diff(parts.to_bits()) <= 1, "{whole} vs {parts}");
        }

        #[test]
        fn mode_energy_times_tanh(t in 1.0f64..1e4, log_ratio in -6.0f64..2.5) {
            let ctx = ThermalContext::new(t).unwrap();
            let w = 10f64.powf(log_ratio) * ctx.thermal_energy() / HBAR;
            let half = 0.5 * HBAR * w;
            let lhs = ctx.mean_mode_energy(w).unwrap() * (half / ctx.thermal_energy()).tanh();
            prop_assert!((lhs / half - 1.0).abs() < 1e-12);
        }

        #[test]
        fn classical_limit_residual(t in 1.0f64..1e4, ratio in 1e-6f64..0.5) {
            let ctx = ThermalContext::new(t).unwrap();
            let kt = ctx.thermal_energy();
            let w = ratio * kt / HBAR;
            let residual = ctx.mean_mode_energy(w).unwrap() - kt;
            let bound = (HBAR * w).powi(2) / (12.0 * kt);
            prop_assert!(residual >= 0.0 && residual <= bound * (1.0 + 1e-9) + 4.0 * f64::EPSILON * kt);
        }
    }
}
