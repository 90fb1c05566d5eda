//! Compensated summation and truncated series with geometric tail estimates.

use super::ConvergenceReport;
use crate::{CasimirError, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Number of consecutive small terms required before stopping.
pub const STOP_WINDOW: usize = 3;
/// Tail extrapolation is only trusted below this term ratio.
pub const MAX_TAIL_RATIO: f64 = 0.9;

/// Sum `term(first), term(first + 1), …` in index order.
///
/// Summation stops once [`STOP_WINDOW`] consecutive terms are each no larger
/// than `rel_tol` times the running total and the extrapolated remainder is
/// below the same bound, confirmed by summing on to twice the index, or
/// after `max_terms` terms. The
/// remainder is then extrapolated as a geometric series from the ratio of the
/// last two terms; the extrapolation is added to the value only when the
/// ratio is below [`MAX_TAIL_RATIO`], otherwise it is reported and flagged.
pub fn sum_with_tail<F>(
    mut term: F,
    first: usize,
    rel_tol: f64,
    max_terms: usize,
) -> Result<(f64, ConvergenceReport)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut acc = NeumaierSum::default();
    let mut report = ConvergenceReport::default();
    let mut small_run = 0;
    let mut last = [0.0_f64; 2];
    let mut count = 0;
    let mut converged = false;
    let mut block_total = 0.0;

    while count < max_terms {
        let t = term(first + count)?;
        if !t.is_finite() {
            return Err(CasimirError::Domain(format!(
                "series term {} is not finite",
                first + count
            )));
        }
        acc.add(t);
        count += 1;
        last = [last[1], t];
        if t.abs() <= rel_tol * acc.total().abs() {
            small_run += 1;
            if small_run >= STOP_WINDOW
                && geometric_tail(last).abs() <= rel_tol * acc.total().abs()
            {
                // a run of small terms can be a zero crossing; sum up to
                // twice the index and accept only if that block is small too
                let end = (2 * count).min(max_terms);
                let mut block = NeumaierSum::default();
                while count < end {
                    let t = term(first + count)?;
                    if !t.is_finite() {
                        return Err(CasimirError::Domain(format!(
                            "series term {} is not finite",
                            first + count
                        )));
                    }
                    acc.add(t);
                    block.add(t);
                    count += 1;
                    last = [last[1], t];
                }
                let bound = rel_tol * acc.total().abs();
                block_total = block.total();
                if block.total().abs() <= bound && geometric_tail(last).abs() <= bound {
                    converged = true;
                    break;
                }
                small_run = 0;
            }
        } else {
            small_run = 0;
        }
    }

    report.terms_used = count;
    let total = acc.total();
    let ratio = if last[0] != 0.0 { last[1] / last[0] } else { 0.0 };
    let tail = if count >= 2 { geometric_tail(last) } else { 0.0 };
    // the confirming block bounds a remainder that decays at least as fast
    report.tail_estimate = if converged && block_total.abs() > tail.abs() {
        block_total
    } else {
        tail
    };

    let value = if ratio.abs() < MAX_TAIL_RATIO {
        total + tail
    } else {
        report.flag(format!(
            "tail ratio {ratio:.4} too close to 1; remainder {tail:.3e} not extrapolated"
        ));
        total
    };
    if !converged {
        report.flag(format!("term budget of {max_terms} exhausted"));
    }
    report.achieved_rel_err = if value != 0.0 {
        (report.tail_estimate / value).abs()
    } else {
        report.tail_estimate.abs()
    };
    Ok((value, report))
}

/// Remainder of a geometric series continuing `last[1]` with ratio
/// `last[1] / last[0]`; infinite when the ratio is not below one.
fn geometric_tail(last: [f64; 2]) -> f64 {
    if last[1] == 0.0 {
        return 0.0;
    }
    let ratio = if last[0] != 0.0 { last[1] / last[0] } else { 0.0 };
    if ratio.abs() < 1.0 {
        last[1] * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY.copysign(last[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn geometric_series_with_tail() {
        let (v, rep) = sum_with_tail(|n| Ok(0.5_f64.powi(n as i32)), 1, 1e-8, 5000).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
        assert!(rep.is_clean());
        assert!(rep.tail_estimate > 0.0);
    }

    #[test]
    fn zero_sequence_stops_after_window() {
        let (v, rep) = sum_with_tail(|_| Ok(0.0), 1, 1e-8, 5000).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(rep.terms_used, 2 * STOP_WINDOW);
        assert!(rep.is_clean());
    }

    #[test]
    fn slowly_converging_series_is_flagged() {
        let (v, rep) =
            sum_with_tail(|n| Ok(1.0 / (n as f64).powi(2)), 1, 1e-8, 5000).unwrap();
        assert!((v - PI * PI / 6.0).abs() < 1e-3);
        assert!(!rep.is_clean());
        assert_eq!(rep.terms_used, 5000);
    }

    #[test]
    fn term_errors_propagate() {
        let r = sum_with_tail(
            |n| {
                if n == 3 {
                    Err(CasimirError::Domain("boom".into()))
                } else {
                    Ok(1.0)
                }
            },
            1,
            1e-8,
            10,
        );
        assert!(r.is_err());
    }

    #[test]
    fn zero_crossing_does_not_stop_the_sum() {
        // squared contrast that vanishes near n = 40, then decays slowly
        let term = |n: usize| {
            let c = (n as f64 - 40.0) / 40.0;
            c * c * 0.99f64.powi(n as i32)
        };
        let exact: f64 = (1..20_000).map(term).sum();
        let (v, rep) = sum_with_tail(|n| Ok(term(n)), 1, 1e-8, 5000).unwrap();
        assert!(rep.terms_used > 80, "{rep:?}");
        assert!((v / exact - 1.0).abs() < 1e-7, "{v} vs {exact}");
    }
}
