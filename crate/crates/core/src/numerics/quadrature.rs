//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Panels are bisected in order of decreasing error estimate until the summed
//! estimate drops below the requested tolerance. The per-panel estimate is the
//! QUADPACK heuristic, which deliberately overstates the true error.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ConvergenceReport, NeumaierSum, TruncationConfig};
use crate::{CasimirError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel { a, b, value, error }
}

/// Integrate `f` over the finite interval `[a, b]` to relative tolerance
/// `rel_tol` (or absolute tolerance `abs_tol`, whichever is looser) using at
/// most `max_nodes` integrand evaluations.
pub fn integrate_with<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_nodes: usize,
) -> Result<(f64, ConvergenceReport)> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(CasimirError::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod15(&mut f, a, b);
    let mut nodes = 15;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut report = ConvergenceReport::default();

    loop {
        if error <= abs_tol.max(rel_tol * value.abs()) {
            break;
        }
        if nodes + 30 > max_nodes {
            let (value, error) = totals(&heap);
            report.nodes_used = nodes;
            report.terms_used = heap.len();
            report.achieved_rel_err = relative(error, value);
            report.flag("quadrature node budget exhausted");
            return Err(CasimirError::NonConvergence {
                what: "adaptive quadrature".into(),
                estimate: value,
                report,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) || !worst.error.is_finite() {
            // cannot split further; accept with a flag
            heap.push(worst);
            if !worst.error.is_finite() {
                return Err(CasimirError::Domain(format!(
                    "integrand is not finite on [{}, {}]",
                    worst.a, worst.b
                )));
            }
            report.flag("panel width reached machine resolution");
            break;
        }
        let left = kronrod15(&mut f, worst.a, mid);
        let right = kronrod15(&mut f, mid, worst.b);
        nodes += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let (value, error) = totals(&heap);
    report.nodes_used = nodes;
    report.terms_used = heap.len();
    report.achieved_rel_err = relative(error, value);
    Ok((value, report))
}

/// Re-sum the panels in order of their left endpoint so the result does not
/// depend on the order in which they were refined.
fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = NeumaierSum::default();
    let mut error = NeumaierSum::default();
    for p in panels {
        value.add(p.value);
        error.add(p.error);
    }
    (value.total(), error.total())
}

fn relative(error: f64, value: f64) -> f64 {
    if value != 0.0 {
        error / value.abs()
    } else {
        error
    }
}

/// Integrate over `[a, b]` with the quadrature settings of `cfg`.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &TruncationConfig,
) -> Result<(f64, ConvergenceReport)> {
    integrate_with(f, a, b, cfg.quad_rel_tol, 0.0, cfg.quad_max_nodes)
}

/// Integrate over `(0, ∞)` an integrand that decays on the length `scale`.
///
/// The half-line is mapped onto `[0, 1)` with `x = scale · t/(1 - t)`; the
/// Kronrod nodes never touch `t = 1`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    f: F,
    scale: f64,
    cfg: &TruncationConfig,
) -> Result<(f64, ConvergenceReport)> {
    semi_infinite_with(f, 0.0, scale, cfg.quad_rel_tol, 0.0, cfg.quad_max_nodes)
}

/// Integrate over `(lower, ∞)`; see [`integrate_semi_infinite`].
pub fn semi_infinite_with<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_nodes: usize,
) -> Result<(f64, ConvergenceReport)> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CasimirError::Domain(format!(
            "integrand scale must be positive, got {scale}"
        )));
    }
    let mapped = move |t: f64| {
        let s = 1.0 - t;
        let fx = f(lower + scale * t / s);
        if fx == 0.0 {
            0.0
        } else {
            fx * scale / (s * s)
        }
    };
    integrate_with(mapped, 0.0, 1.0, rel_tol, abs_tol, max_nodes)
}
