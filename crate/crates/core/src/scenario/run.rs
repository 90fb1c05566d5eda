//! Sweep evaluation and CSV/metadata emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::derjaguin::{cylinder_pfa_per_length, sphere_pfa, PlanarProfile};
use super::{Column, GeometrySpec, Scenario, SweepVariable};
use crate::curved::{
    conformal_parameter, cylinder_universal_energy, sphere_universal_energy, CylinderPair,
    SpherePair,
};
use crate::dielectric::{Electrolyte, MaterialModel};
use crate::planar::{
    longitudinal_zero_energy_per_area, nonuniversal_energy_per_area, total_planar_energy,
    PlanarGeometry, DEFAULT_AREA,
};
use crate::thermal::ThermalContext;
use crate::{CasimirError, Result, TruncationConfig};

/// Samples per decade of the planar profiles used for curved bodies.
const PROFILE_DENSITY: usize = 16;
/// Planar profiles extend to at least this gap, m.
const PROFILE_REACH: f64 = 20e-6;

/// One evaluated sweep point. Energies in joule (per µm² for planar
/// geometries).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    /// Sweep value in m, or mmol/L for salt sweeps.
    pub value: f64,
    pub universal: f64,
    pub longitudinal: f64,
    pub nonuniversal: f64,
    pub total: f64,
    /// `f` or `φ`.
    pub scattering: Option<f64>,
    pub x: Option<f64>,
    pub u: Option<f64>,
    pub y: Option<f64>,
    pub flags: Vec<String>,
    /// False when a truncated computation ran out of budget; the row then
    /// holds the best available estimate.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub thermal_energy: f64,
    pub rows: Vec<Row>,
}

impl SweepResult {
    pub fn unconverged(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.converged)
            .map(|(i, _)| i)
            .collect()
    }

    /// Column headers, each with its unit.
    pub fn headers(&self) -> Vec<String> {
        let s = &self.scenario;
        let per_area = !s.geometry.is_curved();
        let (kt_unit, j_unit) = if per_area {
            ("kBT/um^2", "J/um^2")
        } else {
            ("kBT", "J")
        };
        let mut h = vec![match s.sweep.variable {
            SweepVariable::Gap => "gap [m]".to_string(),
            SweepVariable::Width => "width [m]".to_string(),
            SweepVariable::Salt => "salt [mM]".to_string(),
        }];
        for c in s.columns() {
            match c {
                Column::Total | Column::Universal | Column::Longitudinal | Column::Nonuniversal => {
                    h.push(format!("{c} [{kt_unit}]"));
                    h.push(format!("{c} [{j_unit}]"));
                }
                Column::Ratio => h.push("universal/nonuniversal [1]".into()),
                Column::Flags => h.push("flags [text]".into()),
                other => h.push(format!("{other} [1]")),
            }
        }
        h
    }

    fn record(&self, row: &Row) -> Vec<String> {
        let kt = self.thermal_energy;
        let num = |v: f64| format!("{v:e}");
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut out = vec![num(row.value)];
        for c in self.scenario.columns() {
            let energy = match c {
                Column::Total => Some(row.total),
                Column::Universal => Some(row.universal),
                Column::Longitudinal => Some(row.longitudinal),
                Column::Nonuniversal => Some(row.nonuniversal),
                _ => None,
            };
            if let Some(e) = energy {
                out.push(num(e / kt));
                out.push(num(e));
                continue;
            }
            out.push(match c {
                Column::Ratio => num(row.universal / row.nonuniversal),
                Column::F | Column::Phi => opt(row.scattering),
                Column::X => opt(row.x),
                Column::U => opt(row.u),
                Column::Y => opt(row.y),
                Column::Flags => row.flags.join("; "),
                _ => unreachable!(),
            });
        }
        out
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| CasimirError::config("csv", e.to_string());
        csv.write_record(self.headers()).map_err(csv_err)?;
        for row in &self.rows {
            csv.write_record(self.record(row)).map_err(csv_err)?;
        }
        csv.flush()
            .map_err(|e| CasimirError::io(PathBuf::from("<csv>"), e))
    }

    /// Plot metadata: axes, units and which columns are exact.
    pub fn metadata(&self) -> String {
        let s = &self.scenario;
        let mut m = BTreeMap::new();
        m.insert("scenario", toml::Value::String(s.name.clone()));
        m.insert("description", toml::Value::String(s.description.clone()));
        m.insert("geometry", toml::Value::String(s.geometry.kind().into()));
        m.insert("temperature_K", toml::Value::Float(s.temperature));
        m.insert("x_axis", toml::Value::String(self.headers()[0].clone()));
        m.insert(
            "x_scale",
            toml::Value::String(format!("{:?}", s.sweep.spacing).to_lowercase()),
        );
        m.insert(
            "columns",
            toml::Value::Array(self.headers().into_iter().map(toml::Value::String).collect()),
        );
        let (exact, approx) = if s.geometry.is_curved() {
            (
                "universal, f, phi, x, u, y",
                "longitudinal, nonuniversal, total (planar results summed over the surfaces)",
            )
        } else {
            ("all", "none")
        };
        m.insert("exact_columns", toml::Value::String(exact.into()));
        m.insert("approximate_columns", toml::Value::String(approx.into()));
        if !s.geometry.is_curved() {
            m.insert(
                "area",
                toml::Value::String(format!("energies per {} um^2", DEFAULT_AREA * 1e12)),
            );
        }
        toml::to_string(&m).expect("metadata serializes")
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub result: SweepResult,
}

impl ScenarioOutput {
    /// 0, or 3 when some rows did not converge.
    pub fn exit_code(&self) -> i32 {
        if self.result.unconverged().is_empty() {
            0
        } else {
            3
        }
    }
}

/// Loads and runs the scenario at `path`, writing `<name>.csv` and
/// `<name>.meta.toml` into `out_dir`.
pub fn run_scenario(path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<ScenarioOutput> {
    let scenario = Scenario::load(path)?;
    let csv = out_dir.as_ref().join(format!("{}.csv", scenario.name));
    run_scenario_to(scenario, csv)
}

/// Runs an already loaded scenario; the metadata file sits next to `csv`.
pub fn run_scenario_to(scenario: Scenario, csv: impl Into<PathBuf>) -> Result<ScenarioOutput> {
    let csv = csv.into();
    let result = evaluate(&scenario)?;
    let metadata = csv.with_extension("meta.toml");
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CasimirError::io(dir, e))?;
    }
    let file = std::fs::File::create(&csv).map_err(|e| CasimirError::io(&csv, e))?;
    result.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
        CasimirError::Io { source, .. } => CasimirError::io(&csv, source),
        other => other,
    })?;
    std::fs::write(&metadata, result.metadata()).map_err(|e| CasimirError::io(&metadata, e))?;
    Ok(ScenarioOutput {
        csv,
        metadata,
        result,
    })
}

struct Inputs {
    ctx: ThermalContext,
    medium: MaterialModel,
    bodies: MaterialModel,
    trunc: TruncationConfig,
}

/// Evaluates every sweep point; rows come back in sweep order.
pub fn evaluate(s: &Scenario) -> Result<SweepResult> {
    s.validate()?;
    let inputs = Inputs {
        ctx: ThermalContext::new(s.temperature)?,
        medium: MaterialModel::load(s.resolve(&s.materials.medium))?,
        bodies: MaterialModel::load(s.resolve(&s.materials.bodies))?,
        trunc: s.truncation,
    };
    let values = s.sweep.values()?;
    let profile = nonuniversal_profile(s, &inputs, &values)?;
    let rows = values
        .par_iter()
        .map(|&v| point(s, &inputs, profile.as_ref(), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        scenario: s.clone(),
        thermal_energy: inputs.ctx.thermal_energy(),
        rows,
    })
}

fn gap_at(s: &Scenario, value: f64) -> f64 {
    match s.sweep.variable {
        SweepVariable::Gap => value,
        _ => s.geometry.gap().expect("validated"),
    }
}

fn salt_at(s: &Scenario, value: f64) -> Option<f64> {
    (s.sweep.variable == SweepVariable::Salt).then_some(value)
}

/// Gap range covered by the planar profiles of a curved sweep.
fn profile_range(s: &Scenario, values: &[f64]) -> (f64, f64) {
    let gaps: Vec<f64> = values.iter().map(|&v| gap_at(s, v)).collect();
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(0.0, f64::max);
    (lo, (1e3 * hi).max(PROFILE_REACH))
}

/// Half-space Matsubara sum on a gap grid; ions do not enter it.
fn nonuniversal_profile(s: &Scenario, inp: &Inputs, values: &[f64]) -> Result<Option<PlanarProfile>> {
    if !s.geometry.is_curved() {
        return Ok(None);
    }
    let (lo, hi) = profile_range(s, values);
    PlanarProfile::sample(lo, hi, PROFILE_DENSITY, |h| {
        let geom = PlanarGeometry::half_spaces(h)?;
        Ok(nonuniversal_energy_per_area(&geom, &inp.medium, &inp.bodies, &inp.ctx, &inp.trunc)?.0)
    })
    .map(Some)
}

fn point(s: &Scenario, inp: &Inputs, profile: Option<&PlanarProfile>, value: f64) -> Result<Row> {
    let electrolyte = s.electrolyte.build(inp.medium.clone(), salt_at(s, value))?;
    let gap = gap_at(s, value);
    match &s.geometry {
        GeometrySpec::Planar { .. } | GeometrySpec::Slabs { .. } => {
            let width = match (&s.geometry, s.sweep.variable) {
                (GeometrySpec::Slabs { .. }, SweepVariable::Width) => value,
                (GeometrySpec::Slabs { width, .. }, _) => width.0,
                _ => f64::INFINITY,
            };
            planar_point(inp, &electrolyte, value, gap, width)
        }
        GeometrySpec::Spheres {
            radius_1, radius_2, ..
        } => {
            let pair = SpherePair::new(radius_1.0, radius_2.0, gap)?;
            let mut row = curved_universal(value, sphere_universal_energy(&pair, &inp.ctx, &inp.trunc.channel))?;
            row.x = Some(pair.x());
            row.u = Some(pair.u());
            row.y = Some(conformal_parameter(&pair));
            let profile = profile.expect("curved");
            let reff = pair.effective_radius();
            let long = longitudinal_profile(s, inp, &electrolyte, value)?;
            row.longitudinal = sphere_pfa(&long, reff, gap).unwrap_or(0.0);
            row.nonuniversal = sphere_pfa(profile, reff, gap).unwrap_or(f64::NAN);
            row.finish();
            Ok(row)
        }
        GeometrySpec::Cylinders {
            radius_1,
            radius_2,
            length,
            ..
        } => {
            let pair = CylinderPair::new(radius_1.0, radius_2.0, gap, length.0)?;
            let mut row = curved_universal(value, cylinder_universal_energy(&pair, &inp.ctx, &inp.trunc.channel))?;
            row.x = Some(pair.x());
            let profile = profile.expect("curved");
            let reff = pair.effective_radius();
            let tol = inp.trunc.quad_rel_tol;
            let long = longitudinal_profile(s, inp, &electrolyte, value)?;
            row.longitudinal =
                length.0 * cylinder_pfa_per_length(&long, reff, gap, tol)?.unwrap_or(0.0);
            row.nonuniversal =
                length.0 * cylinder_pfa_per_length(profile, reff, gap, tol)?.unwrap_or(f64::NAN);
            row.finish();
            Ok(row)
        }
    }
}

/// Screened channel sampled from the gap of this point outwards.
fn longitudinal_profile(
    s: &Scenario,
    inp: &Inputs,
    electrolyte: &Electrolyte,
    value: f64,
) -> Result<PlanarProfile> {
    let gap = gap_at(s, value);
    let (_, hi) = profile_range(s, &[value]);
    let eps2 = inp.bodies.static_permittivity();
    PlanarProfile::sample(gap, hi, PROFILE_DENSITY, |h| {
        Ok(longitudinal_zero_energy_per_area(h, electrolyte, eps2, &inp.ctx, &inp.trunc)?.0)
    })
}

fn curved_universal(
    value: f64,
    result: Result<(f64, crate::ScatteringResult)>,
) -> Result<Row> {
    let mut row = Row {
        value,
        universal: 0.0,
        longitudinal: 0.0,
        nonuniversal: 0.0,
        total: 0.0,
        scattering: None,
        x: None,
        u: None,
        y: None,
        flags: Vec::new(),
        converged: true,
    };
    match result {
        Ok((energy, sc)) => {
            row.universal = energy;
            row.scattering = Some(sc.value);
            row.flags.extend(sc.report.flags);
        }
        Err(CasimirError::NonConvergence {
            what,
            estimate,
            report,
        }) => {
            row.scattering = Some(estimate);
            row.universal = f64::NAN;
            row.converged = false;
            row.flags.push(format!("{what} did not converge"));
            row.flags.extend(report.flags);
        }
        Err(e) => return Err(e),
    }
    row.flags.push("longitudinal and nonuniversal columns approximate".into());
    Ok(row)
}

impl Row {
    fn finish(&mut self) {
        self.total = self.universal + self.longitudinal + self.nonuniversal;
    }
}

fn planar_point(
    inp: &Inputs,
    electrolyte: &Electrolyte,
    value: f64,
    gap: f64,
    width: f64,
) -> Result<Row> {
    let geom = PlanarGeometry::slabs(gap, width)?;
    let b = total_planar_energy(&geom, &inp.medium, electrolyte, &inp.bodies, &inp.ctx, &inp.trunc);
    let b = match b {
        Ok(b) => b,
        Err(CasimirError::NonConvergence { what, report, .. }) => {
            let mut flags = vec![format!("{what} did not converge")];
            flags.extend(report.flags);
            return Ok(Row {
                value,
                universal: f64::NAN,
                longitudinal: f64::NAN,
                nonuniversal: f64::NAN,
                total: f64::NAN,
                scattering: None,
                x: None,
                u: None,
                y: None,
                flags,
                converged: false,
            });
        }
        Err(e) => return Err(e),
    };
    Ok(Row {
        value,
        universal: b.universal,
        longitudinal: b.longitudinal,
        nonuniversal: b.nonuniversal_total,
        total: b.total,
        scattering: None,
        x: None,
        u: None,
        y: None,
        converged: b.convergence.matsubara_cutoff < inp.trunc.matsubara_max_terms,
        flags: b.convergence.flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundled(name: &str) -> Scenario {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../scenarios")
            .join(format!("{name}.toml"));
        Scenario::load(path).unwrap()
    }

    #[test]
    fn energy_columns_carry_units_and_agree() {
        for name in ["actin-bundle", "slabs-tetradecane-6nm"] {
            let r = evaluate(&bundled(name)).unwrap();
            let mut out = Vec::new();
            r.write_csv(&mut out).unwrap();
            let text = String::from_utf8(out).unwrap();
            let mut lines = text.lines();
            let headers: Vec<&str> = lines.next().unwrap().split(',').collect();
            assert!(headers.iter().all(|h| h.ends_with(']')), "{headers:?}");
            let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
            assert_eq!(rows.len(), r.rows.len());
            let mut pairs = 0;
            for (i, h) in headers.iter().enumerate() {
                let Some(stem) = h.strip_suffix(" [kBT]").or_else(|| h.strip_suffix(" [kBT/um^2]")) else {
                    continue;
                };
                assert!(headers[i + 1].starts_with(&format!("{stem} [J")));
                for row in &rows {
                    let kt: f64 = row[i].parse().unwrap();
                    let j: f64 = row[i + 1].parse().unwrap();
                    assert!((kt / (j / r.thermal_energy) - 1.0).abs() < 1e-12);
                }
                pairs += 1;
            }
            assert_eq!(pairs, 4);
        }
    }

    #[test]
    fn curved_metadata_marks_approximate_columns() {
        let r = evaluate(&bundled("actin-bundle")).unwrap();
        let meta: toml::Value = toml::from_str(&r.metadata()).unwrap();
        assert!(meta["approximate_columns"].as_str().unwrap().contains("nonuniversal"));
        assert!(r.rows.iter().all(|row| row.converged));
        assert!(r.rows[0].flags.iter().any(|f| f.contains("approximate")));
    }
}
