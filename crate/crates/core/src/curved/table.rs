//! Externally tabulated values of `f` and `φ`.
//!
//! Sphere tables are CSV files with header `x,u,f`; cylinder tables use
//! `x,phi`. Values are interpolated linearly in `(ln x, ln f)`.

use std::path::Path;

use serde::Deserialize;

use crate::{CasimirError, Result};

#[derive(Debug, Deserialize)]
struct SphereRow {
    x: f64,
    u: f64,
    f: f64,
}

#[derive(Debug, Deserialize)]
struct CylinderRow {
    x: f64,
    phi: f64,
}

/// Monotone-in-`x` samples of one curve.
#[derive(Debug, Clone, PartialEq)]
struct Curve {
    ln_x: Vec<f64>,
    ln_y: Vec<f64>,
}

impl Curve {
    fn new(mut points: Vec<(f64, f64)>, what: &str) -> Result<Self> {
        if points.len() < 2 {
            return Err(CasimirError::config(what, "needs at least two rows"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in points.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CasimirError::config(what, format!("duplicate x = {}", w[0].0)));
            }
        }
        for &(x, y) in &points {
            if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
                return Err(CasimirError::config(
                    what,
                    format!("x and the tabulated value must be positive, got ({x}, {y})"),
                ));
            }
        }
        Ok(Self {
            ln_x: points.iter().map(|p| p.0.ln()).collect(),
            ln_y: points.iter().map(|p| p.1.ln()).collect(),
        })
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let lx = x.ln();
        let (first, last) = (self.ln_x[0], *self.ln_x.last().expect("non-empty"));
        if !(lx >= first && lx <= last) {
            return Err(CasimirError::Domain(format!(
                "x = {x} outside tabulated range [{}, {}]",
                first.exp(),
                last.exp()
            )));
        }
        let i = self.ln_x.partition_point(|&v| v <= lx).clamp(1, self.ln_x.len() - 1);
        let (x0, x1) = (self.ln_x[i - 1], self.ln_x[i]);
        let s = (lx - x0) / (x1 - x0);
        Ok((self.ln_y[i - 1] + s * (self.ln_y[i] - self.ln_y[i - 1])).exp())
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CasimirError::io(path, io),
            other => CasimirError::config(path.display().to_string(), format!("{other:?}")),
        })?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CasimirError::config(path.display().to_string(), e.to_string())))
        .collect()
}

/// Tabulated `f(x, u)`; each distinct `u` is a separate curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereTable {
    curves: Vec<(f64, Curve)>,
}

impl SphereTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_rows(read_rows::<SphereRow>(path.as_ref())?.into_iter().map(|r| (r.x, r.u, r.f)))
    }

    pub fn from_rows(rows: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for (x, u, f) in rows {
            if !(u > 0.0 && u <= 0.25) {
                return Err(CasimirError::config("u", format!("must lie in (0, 1/4], got {u}")));
            }
            match groups.iter_mut().find(|g| g.0 == u) {
                Some(g) => g.1.push((x, f)),
                None => groups.push((u, vec![(x, f)])),
            }
        }
        let curves = groups
            .into_iter()
            .map(|(u, pts)| Curve::new(pts, &format!("table curve u = {u}")).map(|c| (u, c)))
            .collect::<Result<Vec<_>>>()?;
        if curves.is_empty() {
            return Err(CasimirError::config("table", "no rows"));
        }
        Ok(Self { curves })
    }

    /// `f` at `x` on the curve whose `u` is closest; the second value is that
    /// `u`.
    pub fn eval(&self, x: f64, u: f64) -> Result<(f64, f64)> {
        let (cu, curve) = self
            .curves
            .iter()
            .min_by(|a, b| (a.0 - u).abs().total_cmp(&(b.0 - u).abs()))
            .expect("non-empty");
        Ok((curve.eval(x)?, *cu))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderTable {
    curve: Curve,
}

impl CylinderTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let rows = read_rows::<CylinderRow>(path.as_ref())?;
        Self::from_rows(rows.into_iter().map(|r| (r.x, r.phi)))
    }

    pub fn from_rows(rows: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Ok(Self {
            curve: Curve::new(rows.into_iter().collect(), "cylinder table")?,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.curve.eval(x)
    }
}
