//! Permittivities at imaginary frequency and the ionic content of the
//! electrolyte.
//!
//! Ions only enter through the Debye length and through the divergence of the
//! static response; their contribution at nonzero Matsubara frequencies is
//! neglected.

use std::collections::HashMap;
use std::path::Path;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::constants::{AVOGADRO, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::thermal::ThermalContext;
use crate::{CasimirError, Result};

/// Debye rotational relaxation, `strength / (1 + ξτ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationalTerm {
    pub strength: f64,
    pub relaxation_time_s: f64,
}

/// Damped oscillator, `strength · ω² / (ω² + ξ² + gξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorTerm {
    pub strength: f64,
    pub resonance_rad_s: f64,
    #[serde(default)]
    pub damping_rad_s: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialModel {
    pub name: String,
    #[serde(default = "one")]
    pub epsilon_infinity: f64,
    #[serde(default)]
    pub rotational_terms: Vec<RotationalTerm>,
    #[serde(default)]
    pub oscillator_terms: Vec<OscillatorTerm>,
    #[serde(default)]
    pub source: String,
}

impl MaterialModel {
    pub fn vacuum() -> Self {
        Self {
            name: "vacuum".into(),
            epsilon_infinity: 1.0,
            rotational_terms: Vec::new(),
            oscillator_terms: Vec::new(),
            source: String::new(),
        }
    }

    /// Parse and validate a JSON material description.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)
            .map_err(|e| CasimirError::config("material", e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CasimirError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CasimirError::Config { field, reason } => CasimirError::Config {
                field: format!("{} ({field})", path.display()),
                reason,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: String, reason: &str| Err(CasimirError::config(field, reason));
        if self.name.trim().is_empty() {
            return bad("name".into(), "must not be empty");
        }
        if !(self.epsilon_infinity.is_finite() && self.epsilon_infinity >= 1.0) {
            return bad("epsilon_infinity".into(), "must be finite and at least 1");
        }
        for (i, t) in self.rotational_terms.iter().enumerate() {
            if !(t.strength.is_finite() && t.strength >= 0.0) {
                return bad(format!("rotational_terms[{i}].strength"), "must be non-negative");
            }
            if !(t.relaxation_time_s.is_finite() && t.relaxation_time_s > 0.0) {
                return bad(format!("rotational_terms[{i}].relaxation_time_s"), "must be positive");
            }
        }
        for (i, t) in self.oscillator_terms.iter().enumerate() {
            if !(t.strength.is_finite() && t.strength >= 0.0) {
                return bad(format!("oscillator_terms[{i}].strength"), "must be non-negative");
            }
            if !(t.resonance_rad_s.is_finite() && t.resonance_rad_s > 0.0) {
                return bad(format!("oscillator_terms[{i}].resonance_rad_s"), "must be positive");
            }
            if !(t.damping_rad_s.is_finite() && t.damping_rad_s >= 0.0) {
                return bad(format!("oscillator_terms[{i}].damping_rad_s"), "must be non-negative");
            }
        }
        Ok(())
    }

    /// ε(iξ) for ξ ≥ 0 in rad/s.
    pub fn evaluate(&self, xi: f64) -> f64 {
        debug_assert!(xi >= 0.0);
        let mut eps = self.epsilon_infinity;
        for t in &self.rotational_terms {
            eps += t.strength / (1.0 + xi * t.relaxation_time_s);
        }
        for t in &self.oscillator_terms {
            let w2 = t.resonance_rad_s * t.resonance_rad_s;
            eps += t.strength * w2 / (w2 + xi * xi + t.damping_rad_s * xi);
        }
        eps
    }

    pub fn static_permittivity(&self) -> f64 {
        self.evaluate(0.0)
    }
}

/// `|ε_a(iξ) − ε_b(iξ)| / ε_a(iξ)`.
pub fn index_mismatch(a: &MaterialModel, b: &MaterialModel, xi: f64) -> f64 {
    let ea = a.evaluate(xi);
    (ea - b.evaluate(xi)).abs() / ea
}

/// Material with a memo of its values at previously requested frequencies.
///
/// The cache is keyed on the bit pattern of ξ, so lookups return exactly the
/// value a direct evaluation would give.
#[derive(Debug)]
pub struct CachedPermittivity<'a> {
    model: &'a MaterialModel,
    cache: RwLock<HashMap<u64, f64>>,
}

impl<'a> CachedPermittivity<'a> {
    pub fn new(model: &'a MaterialModel) -> Self {
        Self {
            model,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &MaterialModel {
        self.model
    }

    pub fn evaluate(&self, xi: f64) -> f64 {
        let key = xi.to_bits();
        if let Some(&v) = self.cache.read().expect("cache poisoned").get(&key) {
            return v;
        }
        let v = self.model.evaluate(xi);
        self.cache.write().expect("cache poisoned").insert(key, v);
        v
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    /// Number density in m⁻³.
    pub number_density: f64,
    pub valence: i32,
}

impl IonSpecies {
    /// Species at a molar concentration given in mmol/L.
    pub fn from_millimolar(concentration_mm: f64, valence: i32) -> Self {
        Self {
            number_density: concentration_mm * AVOGADRO,
            valence,
        }
    }
}

/// Water with dissolved ions, or with a prescribed Debye length.
#[derive(Debug, Clone, PartialEq)]
pub struct Electrolyte {
    pub solvent: MaterialModel,
    pub ions: Vec<IonSpecies>,
    /// When set, overrides the value computed from `ions`.
    pub debye_length_override: Option<f64>,
}

impl Electrolyte {
    pub fn new(solvent: MaterialModel, ions: Vec<IonSpecies>) -> Result<Self> {
        for (i, s) in ions.iter().enumerate() {
            if !(s.number_density.is_finite() && s.number_density >= 0.0) {
                return Err(CasimirError::config(
                    format!("ions[{i}].number_density"),
                    "must be non-negative",
                ));
            }
        }
        Ok(Self {
            solvent,
            ions,
            debye_length_override: None,
        })
    }

    /// Symmetric monovalent salt at `concentration_mm` mmol/L.
    pub fn monovalent_salt(solvent: MaterialModel, concentration_mm: f64) -> Result<Self> {
        if !(concentration_mm.is_finite() && concentration_mm >= 0.0) {
            return Err(CasimirError::config("salt", "concentration must be non-negative"));
        }
        Self::new(
            solvent,
            vec![
                IonSpecies::from_millimolar(concentration_mm, 1),
                IonSpecies::from_millimolar(concentration_mm, -1),
            ],
        )
    }

    pub fn with_debye_length(solvent: MaterialModel, debye_length: f64) -> Result<Self> {
        if !(debye_length.is_finite() && debye_length > 0.0) {
            return Err(CasimirError::config("debye_length", "must be positive and finite"));
        }
        Ok(Self {
            solvent,
            ions: Vec::new(),
            debye_length_override: Some(debye_length),
        })
    }

    /// λ_D = √(ε₀ ε_b(0) k_BT / Σ nᵢ qᵢ²), or `+∞` without ions.
    pub fn debye_length(&self, ctx: &ThermalContext) -> f64 {
        if let Some(l) = self.debye_length_override {
            return l;
        }
        let charge_density: f64 = self
            .ions
            .iter()
            .map(|s| {
                let q = f64::from(s.valence) * ELEMENTARY_CHARGE;
                s.number_density * q * q
            })
            .sum();
        if charge_density == 0.0 {
            log::warn!("electrolyte has no ions; Debye length is infinite");
            return f64::INFINITY;
        }
        (VACUUM_PERMITTIVITY * self.solvent.static_permittivity() * ctx.thermal_energy()
            / charge_density)
            .sqrt()
    }
}
