//! Validation report over a directory of material files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dielectric::{index_mismatch, MaterialModel};
use crate::thermal::ThermalContext;
use crate::{CasimirError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialEntry {
    pub path: PathBuf,
    pub name: String,
    pub static_permittivity: f64,
    /// ε(iξ₁).
    pub first_matsubara_permittivity: f64,
    /// `|ε_water − ε|/ε_water` at ξ₁, when a material named `water` is present.
    pub mismatch_vs_water: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialsReport {
    pub temperature: f64,
    pub first_matsubara: f64,
    pub entries: Vec<MaterialEntry>,
}

impl MaterialsReport {
    pub fn entry(&self, name: &str) -> Option<&MaterialEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Loads every `*.json` file in `dir` (sorted by file name) and evaluates it
/// at zero frequency and at ξ₁. The first invalid file aborts with its error.
pub fn list_and_validate_materials(dir: impl AsRef<Path>, ctx: &ThermalContext) -> Result<MaterialsReport> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CasimirError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| CasimirError::io(dir, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let models = paths
        .iter()
        .map(|p| MaterialModel::load(p).map(|m| (p.clone(), m)))
        .collect::<Result<Vec<_>>>()?;
    let xi = ctx.first_matsubara();
    let water = models.iter().find(|(_, m)| m.name == "water").map(|(_, m)| m.clone());
    let entries = models
        .into_iter()
        .map(|(path, m)| MaterialEntry {
            name: m.name.clone(),
            static_permittivity: m.static_permittivity(),
            first_matsubara_permittivity: m.evaluate(xi),
            mismatch_vs_water: water.as_ref().map(|w| index_mismatch(w, &m, xi)),
            path,
        })
        .collect();
    Ok(MaterialsReport {
        temperature: ctx.temperature(),
        first_matsubara: xi,
        entries,
    })
}

impl fmt::Display for MaterialsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "T = {} K, xi_1 = {:.4e} rad/s, {} material(s)",
            self.temperature,
            self.first_matsubara,
            self.entries.len()
        )?;
        for e in &self.entries {
            let mismatch = e
                .mismatch_vs_water
                .map(|m| format!("{:.2}%", 100.0 * m))
                .unwrap_or_else(|| "n/a".into());
            writeln!(
                f,
                "{:<16} eps(0) = {:<10.4} eps(i xi_1) = {:<8.4} mismatch vs water = {:<8} {}",
                e.name,
                e.static_permittivity,
                e.first_matsubara_permittivity,
                mismatch,
                e.path.display()
            )?;
        }
        Ok(())
    }
}
