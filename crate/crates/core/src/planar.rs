//! Free energy per unit area between parallel half-spaces or slabs across an
//! electrolyte gap.
//!
//! All `k` integrals are written in the variable `u = 2κ₁d`, which carries a
//! weight `e^{-u}` and makes the node count independent of the gap.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{SPEED_OF_LIGHT, ZETA3};
use crate::dielectric::{CachedPermittivity, Electrolyte, MaterialModel};
use crate::numerics::quadrature::semi_infinite_with;
use crate::numerics::{sum_with_tail, ConvergenceReport, NeumaierSum, TruncationConfig};
use crate::thermal::ThermalContext;
use crate::{CasimirError, Result};

/// Default reporting area, 1 µm².
pub const DEFAULT_AREA: f64 = 1e-12;

/// Matsubara terms evaluated per parallel batch.
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarGeometry {
    /// Gap `d` between the inner interfaces, m.
    pub gap: f64,
    /// Slab thickness `w`, m; `f64::INFINITY` for half-spaces.
    pub slab_width: f64,
    /// Area used to turn energies per area into energies, m².
    pub area: f64,
}

impl PlanarGeometry {
    pub fn half_spaces(gap: f64) -> Result<Self> {
        Self::slabs(gap, f64::INFINITY)
    }

    pub fn slabs(gap: f64, slab_width: f64) -> Result<Self> {
        let g = Self {
            gap,
            slab_width,
            area: DEFAULT_AREA,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(CasimirError::Domain(format!("gap must be positive, got {}", self.gap)));
        }
        if !(self.slab_width > 0.0) {
            return Err(CasimirError::Domain(format!(
                "slab width must be positive, got {}",
                self.slab_width
            )));
        }
        if !(self.area.is_finite() && self.area > 0.0) {
            return Err(CasimirError::Domain(format!("area must be positive, got {}", self.area)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::TE, Polarization::TM];
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarConvergence {
    /// Highest Matsubara index summed.
    pub matsubara_cutoff: usize,
    /// Extrapolated Matsubara remainder, J.
    pub tail_estimate: f64,
    /// Sum of the quadrature error estimates, J.
    pub quadrature_error: f64,
    pub flags: Vec<String>,
}

/// Free energy split into its three contributions, in joule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub universal: f64,
    pub longitudinal: f64,
    /// `(n, F_n)` for `n ≥ 1`.
    pub nonuniversal_terms: Vec<(usize, f64)>,
    pub nonuniversal_total: f64,
    pub total: f64,
    pub convergence: PlanarConvergence,
}

/// Universal Hamaker constant `H = (3ζ(3)/4) k_BT`.
pub fn hamaker_constant(ctx: &ThermalContext) -> f64 {
    0.75 * ZETA3 * ctx.thermal_energy()
}

/// Universal zero-frequency TM energy per area, `−H/(12π d²)`.
pub fn universal_energy_per_area(gap: f64, ctx: &ThermalContext) -> Result<f64> {
    check_gap(gap)?;
    Ok(-hamaker_constant(ctx) / (12.0 * PI * gap * gap))
}

/// The universal term by quadrature of `(k_BT/2)∫d²k/(2π)² ln(1 − e^{−2kd})`.
pub fn universal_energy_per_area_numeric(
    gap: f64,
    ctx: &ThermalContext,
    cfg: &TruncationConfig,
) -> Result<(f64, ConvergenceReport)> {
    check_gap(gap)?;
    let (integral, report) = semi_infinite_with(
        |u| u * (-(-u).exp()).ln_1p(),
        0.0,
        1.0,
        cfg.quad_rel_tol,
        0.0,
        cfg.quad_max_nodes,
    )?;
    Ok((ctx.thermal_energy() / (16.0 * PI * gap * gap) * integral, report))
}

/// Longitudinal reflection amplitude at zero frequency.
pub fn longitudinal_reflection(k: f64, debye_length: f64, eps_b: f64, eps2: f64) -> f64 {
    let kappa = (k * k + debye_length.powi(-2)).sqrt();
    (eps_b * kappa - eps2 * k) / (eps_b * kappa + eps2 * k)
}

/// Screened longitudinal zero-frequency energy per area,
/// `(k_BT/2)∫d²k/(2π)² ln(1 − r_ℓ² e^{−2√(k²+λ_D⁻²) d})`.
///
/// Returns zero with a flag when the electrolyte carries no ions.
pub fn longitudinal_zero_energy_per_area(
    gap: f64,
    electrolyte: &Electrolyte,
    eps2_static: f64,
    ctx: &ThermalContext,
    cfg: &TruncationConfig,
) -> Result<(f64, ConvergenceReport)> {
    check_gap(gap)?;
    let lambda = electrolyte.debye_length(ctx);
    if lambda.is_infinite() {
        let mut report = ConvergenceReport::default();
        report.flag("no ions: longitudinal channel absent");
        return Ok((0.0, report));
    }
    let eps_b = electrolyte.solvent.static_permittivity();
    let u0 = 2.0 * gap / lambda;
    let integrand = |v: f64| {
        let u = v + u0;
        let kappa = u / (2.0 * gap);
        let k = (v * (v + 2.0 * u0)).sqrt() / (2.0 * gap);
        let r = (eps_b * kappa - eps2_static * k) / (eps_b * kappa + eps2_static * k);
        u * (-r * r * (-u).exp()).ln_1p()
    };
    let (integral, report) =
        semi_infinite_with(integrand, 0.0, 1.0, cfg.quad_rel_tol, 0.0, cfg.quad_max_nodes)?;
    Ok((ctx.thermal_energy() / (16.0 * PI * gap * gap) * integral, report))
}

/// Fresnel coefficient from the gap medium `eps1` into `eps2` at imaginary
/// frequency `xi` and in-plane wavenumber `k`.
pub fn fresnel_coefficient(pol: Polarization, eps1: f64, eps2: f64, xi: f64, k: f64) -> f64 {
    let w2 = (xi / SPEED_OF_LIGHT).powi(2);
    let kappa1 = (eps1 * w2 + k * k).sqrt();
    let kappa2 = (eps2 * w2 + k * k).sqrt();
    fresnel_from_kappas(pol, eps1, eps2, w2, k * k, kappa1, kappa2)
}

// Numerators rewritten so index-matched media give no cancellation.
fn fresnel_from_kappas(
    pol: Polarization,
    eps1: f64,
    eps2: f64,
    w2: f64,
    k2: f64,
    kappa1: f64,
    kappa2: f64,
) -> f64 {
    if eps2.is_infinite() {
        return match pol {
            Polarization::TE => -1.0,
            Polarization::TM => 1.0,
        };
    }
    match pol {
        Polarization::TE => {
            let s = kappa1 + kappa2;
            if s == 0.0 {
                return 0.0;
            }
            (eps1 - eps2) * w2 / (s * s)
        }
        Polarization::TM => {
            let s = eps2 * kappa1 + eps1 * kappa2;
            if s == 0.0 {
                return (eps2 - eps1) / (eps2 + eps1);
            }
            (eps2 - eps1) * (eps1 * eps2 * w2 + (eps1 + eps2) * k2) / (s * s)
        }
    }
}

/// Reflection coefficient of a slab of thickness `w` embedded in `eps1`.
pub fn slab_reflection(pol: Polarization, eps1: f64, eps2: f64, xi: f64, k: f64, w: f64) -> f64 {
    let w2 = (xi / SPEED_OF_LIGHT).powi(2);
    let kappa1 = (eps1 * w2 + k * k).sqrt();
    let kappa2 = (eps2 * w2 + k * k).sqrt();
    let r = fresnel_from_kappas(pol, eps1, eps2, w2, k * k, kappa1, kappa2);
    slab_from_interface(r, kappa2, w)
}

fn slab_from_interface(r: f64, kappa2: f64, w: f64) -> f64 {
    if w.is_infinite() {
        return r;
    }
    let x = -2.0 * kappa2 * w;
    r * (-x.exp_m1()) / (1.0 - r * r * x.exp())
}

/// Contribution of the Matsubara frequency `ξ_n`, `n ≥ 1`, per area:
/// `k_BT Σ_σ ∫d²k/(2π)² ln(1 − r̃_σ² e^{−2κ₁d})`.
pub fn matsubara_term_slab(
    n: usize,
    geom: &PlanarGeometry,
    mat_gap: &MaterialModel,
    mat_slab: &MaterialModel,
    ctx: &ThermalContext,
    trunc: &TruncationConfig,
) -> Result<(f64, ConvergenceReport)> {
    let gap_eps = CachedPermittivity::new(mat_gap);
    let slab_eps = CachedPermittivity::new(mat_slab);
    matsubara_term_cached(n, geom, &gap_eps, &slab_eps, ctx, trunc)
}

fn matsubara_term_cached(
    n: usize,
    geom: &PlanarGeometry,
    gap_eps: &CachedPermittivity<'_>,
    slab_eps: &CachedPermittivity<'_>,
    ctx: &ThermalContext,
    trunc: &TruncationConfig,
) -> Result<(f64, ConvergenceReport)> {
    if n == 0 {
        return Err(CasimirError::Domain(
            "nonzero Matsubara terms start at n = 1".into(),
        ));
    }
    geom.validate()?;
    let xi = ctx.matsubara_frequency(n as u32);
    let eps1 = gap_eps.evaluate(xi);
    let eps2 = slab_eps.evaluate(xi);
    if eps1 == eps2 {
        return Ok((0.0, ConvergenceReport::default()));
    }
    let d = geom.gap;
    let w = geom.slab_width;
    let w2 = (xi / SPEED_OF_LIGHT).powi(2);
    let u0 = 2.0 * d * (eps1 * w2).sqrt();
    let integrand = |v: f64| {
        let u = v + u0;
        let k2 = v * (v + 2.0 * u0) / (4.0 * d * d);
        let kappa1 = u / (2.0 * d);
        let kappa2 = ((eps2 - eps1) * w2 + kappa1 * kappa1).sqrt();
        let decay = (-u).exp();
        let mut sum = 0.0;
        for pol in Polarization::BOTH {
            let r = fresnel_from_kappas(pol, eps1, eps2, w2, k2, kappa1, kappa2);
            let rt = slab_from_interface(r, kappa2, w);
            sum += (-rt * rt * decay).ln_1p();
        }
        u * sum
    };
    let (integral, report) = semi_infinite_with(
        integrand,
        0.0,
        1.0,
        trunc.quad_rel_tol,
        0.0,
        trunc.quad_max_nodes,
    )?;
    Ok((ctx.thermal_energy() / (8.0 * PI * d * d) * integral, report))
}

/// Sum of all `n ≥ 1` Matsubara terms per area with the cutoff policy of
/// [`sum_with_tail`]. Returns the value, the individual terms and the
/// convergence record (per area).
pub fn nonuniversal_energy_per_area(
    geom: &PlanarGeometry,
    mat_gap: &MaterialModel,
    mat_slab: &MaterialModel,
    ctx: &ThermalContext,
    trunc: &TruncationConfig,
) -> Result<(f64, Vec<(usize, f64)>, PlanarConvergence)> {
    trunc.validate()?;
    geom.validate()?;
    let gap_eps = CachedPermittivity::new(mat_gap);
    let slab_eps = CachedPermittivity::new(mat_slab);
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut quad_error = NeumaierSum::default();
    let mut flags = Vec::new();

    let fetch = |n: usize| -> Result<f64> {
        if n > terms.len() {
            let start = terms.len() + 1;
            let batch: Vec<Result<(f64, ConvergenceReport)>> = (start..start + BATCH)
                .into_par_iter()
                .map(|m| matsubara_term_cached(m, geom, &gap_eps, &slab_eps, ctx, trunc))
                .collect();
            for (i, r) in batch.into_iter().enumerate() {
                let (value, report) = r?;
                quad_error.add(report.achieved_rel_err * value.abs());
                for f in report.flags {
                    flags.push(format!("n = {}: {f}", start + i));
                }
                terms.push((start + i, value));
            }
        }
        Ok(terms[n - 1].1)
    };
    let (value, report) =
        sum_with_tail(fetch, 1, trunc.matsubara_rel_tol, trunc.matsubara_max_terms)?;
    terms.truncate(report.terms_used);
    flags.extend(report.flags.iter().cloned());
    Ok((
        value,
        terms,
        PlanarConvergence {
            matsubara_cutoff: report.terms_used,
            tail_estimate: report.tail_estimate,
            quadrature_error: quad_error.total(),
            flags,
        },
    ))
}

/// Full breakdown for two identical slabs (or half-spaces) across the
/// electrolyte.
///
/// The universal term of two slabs equals the half-space value, and the
/// longitudinal term is evaluated with half-space reflection amplitudes.
pub fn total_planar_energy(
    geom: &PlanarGeometry,
    mat_gap: &MaterialModel,
    electrolyte: &Electrolyte,
    mat_slab: &MaterialModel,
    ctx: &ThermalContext,
    trunc: &TruncationConfig,
) -> Result<EnergyBreakdown> {
    geom.validate()?;
    let a = geom.area;
    let universal = universal_energy_per_area(geom.gap, ctx)? * a;
    let (long, long_report) = longitudinal_zero_energy_per_area(
        geom.gap,
        electrolyte,
        mat_slab.static_permittivity(),
        ctx,
        trunc,
    )?;
    let (nonuniv, terms, mut conv) =
        nonuniversal_energy_per_area(geom, mat_gap, mat_slab, ctx, trunc)?;
    let longitudinal = long * a;
    let nonuniversal_total = nonuniv * a;
    conv.tail_estimate *= a;
    conv.quadrature_error = conv.quadrature_error * a + long_report.achieved_rel_err * longitudinal.abs();
    conv.flags.extend(long_report.flags);
    Ok(EnergyBreakdown {
        universal,
        longitudinal,
        nonuniversal_terms: terms.into_iter().map(|(n, f)| (n, f * a)).collect(),
        nonuniversal_total,
        total: universal + longitudinal + nonuniversal_total,
        convergence: conv,
    })
}

fn check_gap(gap: f64) -> Result<()> {
    if gap.is_finite() && gap > 0.0 {
        Ok(())
    } else {
        Err(CasimirError::Domain(format!("gap must be positive, got {gap}")))
    }
}
