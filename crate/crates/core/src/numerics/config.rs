use serde::{Deserialize, Serialize};

use crate::{CasimirError, Result};

/// Angular-momentum truncation of the multipole (spheres) or cylindrical
/// (cylinders) channel basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelTruncation {
    /// Initial ℓ_max (spheres) or n_max (cylinders). `None` picks
    /// `max(10, ceil(10/x))`.
    pub max_angular_order: Option<usize>,
    /// Upper bound for the order reached by `auto_grow`.
    pub order_budget: usize,
    /// Maximum number of axial quadrature nodes for cylinders.
    pub axial_quadrature_nodes: usize,
    /// Double the order until two successive results agree to
    /// `target_rel_tol`.
    pub auto_grow: bool,
    pub target_rel_tol: f64,
}

impl Default for ChannelTruncation {
    fn default() -> Self {
        Self {
            max_angular_order: None,
            order_budget: 4096,
            axial_quadrature_nodes: 20_000,
            auto_grow: true,
            target_rel_tol: 1e-6,
        }
    }
}

impl ChannelTruncation {
    pub fn validate(&self) -> Result<()> {
        if let Some(order) = self.max_angular_order {
            if order < 2 {
                return Err(CasimirError::config(
                    "channel.max_angular_order",
                    format!("must be at least 2, got {order}"),
                ));
            }
        }
        check_tolerance("channel.target_rel_tol", self.target_rel_tol)?;
        check_budget("channel.axial_quadrature_nodes", self.axial_quadrature_nodes)?;
        check_budget("channel.order_budget", self.order_budget)
    }

    /// Starting order for aspect ratio `x = d/R_eff`.
    pub fn initial_order(&self, x: f64) -> usize {
        self.max_angular_order
            .unwrap_or_else(|| (10.0 / x).ceil().max(10.0) as usize)
            .min(self.order_budget)
    }
}

/// Tolerances and budgets for every truncated computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationConfig {
    pub quad_rel_tol: f64,
    pub quad_max_nodes: usize,
    pub matsubara_rel_tol: f64,
    pub matsubara_max_terms: usize,
    pub channel: ChannelTruncation,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            quad_rel_tol: 1e-9,
            quad_max_nodes: 200_000,
            matsubara_rel_tol: 1e-8,
            matsubara_max_terms: 5000,
            channel: ChannelTruncation::default(),
        }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        check_tolerance("quad_rel_tol", self.quad_rel_tol)?;
        check_tolerance("matsubara_rel_tol", self.matsubara_rel_tol)?;
        check_budget("quad_max_nodes", self.quad_max_nodes)?;
        check_budget("matsubara_max_terms", self.matsubara_max_terms)?;
        self.channel.validate()
    }

    /// Same config with every relative tolerance replaced by `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.quad_rel_tol = tol;
        self.matsubara_rel_tol = tol;
        self.channel.target_rel_tol = tol.max(1e-12);
        self
    }
}

fn check_tolerance(field: &str, tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 1e-2 {
        Ok(())
    } else {
        Err(CasimirError::config(
            field,
            format!("tolerance must lie in (0, 1e-2], got {tol}"),
        ))
    }
}

fn check_budget(field: &str, budget: usize) -> Result<()> {
    if budget >= 16 {
        Ok(())
    } else {
        Err(CasimirError::config(
            field,
            format!("budget must be at least 16, got {budget}"),
        ))
    }
}

/// How a truncated computation ended.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Estimated relative error of the returned value.
    pub achieved_rel_err: f64,
    /// Integrand evaluations (quadrature) or channel order (scattering).
    pub nodes_used: usize,
    /// Terms summed (series) or channel blocks evaluated (scattering).
    pub terms_used: usize,
    /// Extrapolated remainder, in the units of the result.
    pub tail_estimate: f64,
    pub flags: Vec<String>,
}

impl ConvergenceReport {
    pub fn flag(&mut self, message: impl Into<String>) {
        self.flags.push(message.into());
    }

    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}
