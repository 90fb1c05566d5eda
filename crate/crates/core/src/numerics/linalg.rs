//! Log-determinants of `1 - M` for round-trip operators.
//!
//! Dense matrices go through LU with partial pivoting. The scattering kernels
//! produce matrices whose entries decay quickly away from a band; those are
//! stored row-wise as [`BandedRows`] and factorized with a profile (skyline)
//! Cholesky, which also certifies that the operator is a contraction: a
//! non-positive pivot means `1 - N Nᵀ` is not positive definite.

use crate::{CasimirError, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// `ln det(1 - M)` for a general square matrix.
///
/// Fails with [`CasimirError::NonContraction`] when the determinant is not
/// strictly positive.
pub fn logdet_one_minus(m: &SquareMatrix) -> Result<f64> {
    let n = m.dim();
    let mut a: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            f64::from(u8::from(i == j)) - m.data[k]
        })
        .collect();
    let mut sign = 1.0;
    let mut logdet = 0.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .expect("non-empty range");
        let pivot = a[pivot_row * n + col];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(CasimirError::NonContraction(format!(
                "singular 1 - M at column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            sign = -sign;
        }
        if pivot < 0.0 {
            sign = -sign;
        }
        logdet += pivot.abs().ln();
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col + 1..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
        }
    }
    if sign < 0.0 {
        return Err(CasimirError::NonContraction(
            "det(1 - M) is negative".into(),
        ));
    }
    Ok(logdet)
}

/// Sparse rows: row `i` holds the entries of columns
/// `start[i] .. start[i] + len[i]`; everything else is zero.
#[derive(Debug, Clone, Default)]
pub struct BandedRows {
    starts: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl BandedRows {
    pub fn new() -> Self {
        Self {
            starts: Vec::new(),
            offsets: vec![0],
            values: Vec::new(),
        }
    }

    /// Append the next row, whose first stored column is `start`.
    pub fn push_row(&mut self, start: usize, values: &[f64]) {
        self.starts.push(start);
        self.values.extend_from_slice(values);
        self.offsets.push(self.values.len());
    }

    pub fn rows(&self) -> usize {
        self.starts.len()
    }

    /// Column range and values of row `i`.
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        (
            self.starts[i],
            &self.values[self.offsets[i]..self.offsets[i + 1]],
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, v) = self.row(i);
        if j >= s && j < s + v.len() {
            v[j - s]
        } else {
            0.0
        }
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self, n: usize) -> SquareMatrix {
        SquareMatrix::from_fn(n, |i, j| if i < self.rows() { self.get(i, j) } else { 0.0 })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0_f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let rest: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + rest
}

/// Lower profile of a symmetric matrix: row `i` stores columns
/// `first[i] ..= i`.
struct Profile {
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl Profile {
    fn with_first(first: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(first.len() + 1);
        offsets.push(0);
        for (i, &f) in first.iter().enumerate() {
            offsets.push(offsets[i] + (i + 1 - f));
        }
        let len = *offsets.last().unwrap_or(&0);
        Self {
            first,
            offsets,
            data: vec![0.0; len],
        }
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        &mut self.data[a..b]
    }

    /// In-place Cholesky of `1 + P`, where the diagonal of `P` is stored as
    /// its offset from one so that `ln det` keeps its digits when the
    /// determinant is close to one. Returns `ln det`.
    fn cholesky_logdet(mut self) -> Result<f64> {
        let n = self.first.len();
        let mut logdet = 0.0;
        for i in 0..n {
            let fi = self.first[i];
            let (head, tail) = self.data.split_at_mut(self.offsets[i]);
            let row_i = &mut tail[..i + 1 - fi];
            for j in fi..=i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let s = if j < i {
                    let row_j = &head[self.offsets[j]..self.offsets[j + 1]];
                    let sum = dot(&row_i[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
                    (row_i[j - fi] - sum) / row_j[j - fj]
                } else {
                    let sum = dot(&row_i[k0 - fi..j - fi], &row_i[k0 - fi..j - fi]);
                    let delta = row_i[j - fi] - sum;
                    if !(delta > -1.0) {
                        return Err(CasimirError::NonContraction(format!(
                            "non-positive pivot {:.3e} at row {i}",
                            1.0 + delta
                        )));
                    }
                    logdet += delta.ln_1p();
                    (1.0 + delta).sqrt()
                };
                row_i[j - fi] = s;
            }
        }
        Ok(logdet)
    }
}

/// `ln det(1 - N Nᵀ)` for a banded `N` with `n` rows.
pub fn logdet_one_minus_gram(n_mat: &BandedRows) -> Result<f64> {
    let n = n_mat.rows();
    let ranges: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let (s, v) = n_mat.row(i);
            (s, s + v.len())
        })
        .collect();
    // Rows j < first[i] end at or before row i starts. Using the running
    // maximum of the row ends may include a few structural zeros, which is
    // harmless.
    let mut max_end = Vec::with_capacity(n);
    let mut running = 0;
    for &(s, e) in &ranges {
        if e > s {
            running = running.max(e);
        }
        max_end.push(running);
    }
    let first: Vec<usize> = (0..n)
        .map(|i| {
            let (si, ei) = ranges[i];
            if ei == si {
                return i;
            }
            max_end.partition_point(|&e| e <= si).min(i)
        })
        .collect();
    let mut profile = Profile::with_first(first);
    for i in 0..n {
        let fi = profile.first[i];
        let (si, vi) = n_mat.row(i);
        let row = profile.row_mut(i);
        for j in fi..=i {
            let (sj, vj) = n_mat.row(j);
            let lo = si.max(sj);
            let hi = (si + vi.len()).min(sj + vj.len());
            let g = if lo < hi {
                dot(&vi[lo - si..hi - si], &vj[lo - sj..hi - sj])
            } else {
                0.0
            };
            row[j - fi] = -g;
        }
    }
    profile.cholesky_logdet()
}

/// `ln det(1 - sign·N)` for a symmetric banded `N` (both halves stored).
pub fn logdet_one_minus_symmetric(n_mat: &BandedRows, sign: f64) -> Result<f64> {
    let n = n_mat.rows();
    let first: Vec<usize> = (0..n).map(|i| n_mat.row(i).0.min(i)).collect();
    let mut profile = Profile::with_first(first);
    for i in 0..n {
        let fi = profile.first[i];
        let (si, vi) = n_mat.row(i);
        let row = profile.row_mut(i);
        for j in fi..=i {
            let nij = if j >= si && j < si + vi.len() {
                vi[j - si]
            } else {
                0.0
            };
            row[j - fi] = -sign * nij;
        }
    }
    profile.cholesky_logdet()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_matrix_has_zero_logdet() {
        assert_eq!(logdet_one_minus(&SquareMatrix::zeros(5)).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_matrix() {
        let a = [0.1, 0.5, 0.9, 0.0];
        let m = SquareMatrix::from_fn(4, |i, j| if i == j { a[i] } else { 0.0 });
        let expected: f64 = a.iter().map(|x| (1.0 - x).ln()).sum();
        assert!((logdet_one_minus(&m).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn non_contraction_is_rejected() {
        let m = SquareMatrix::from_fn(2, |i, j| if i == j { 1.5 } else { 0.0 });
        // for a general M only the sign of det(1 - M) is certified
        assert!(logdet_one_minus(&m).is_ok());
        let m = SquareMatrix::from_fn(2, |i, j| if i == j && i == 0 { 2.0 } else { 0.0 });
        assert!(matches!(
            logdet_one_minus(&m),
            Err(CasimirError::NonContraction(_))
        ));
    }

    fn banded_example(n: usize, scale: f64) -> BandedRows {
        let mut b = BandedRows::new();
        for i in 0..n {
            let start = i.saturating_sub(2);
            let end = (i + 3).min(n);
            let vals: Vec<f64> = (start..end)
                .map(|j| scale / (1.0 + (i as f64 - j as f64).powi(2) + 0.1 * j as f64))
                .collect();
            b.push_row(start, &vals);
        }
        b
    }

    #[test]
    fn gram_logdet_matches_dense() {
        let n = 12;
        let b = banded_example(n, 0.2);
        let dense = b.to_dense(n);
        let mut t = dense.clone();
        for i in 0..n {
            for j in 0..n {
                t.set(i, j, dense.get(j, i));
            }
        }
        let gram = dense.matmul(&t);
        let want = logdet_one_minus(&gram).unwrap();
        let got = logdet_one_minus_gram(&b).unwrap();
        assert!((want - got).abs() < 1e-13, "{want} {got}");
    }

    #[test]
    fn symmetric_logdet_matches_dense() {
        let n: usize = 10;
        let mut b = BandedRows::new();
        for i in 0..n {
            let start = i.saturating_sub(3);
            let end = (i + 4).min(n);
            let vals: Vec<f64> = (start..end)
                .map(|j| 0.15 / (1.0 + (i as f64 - j as f64).abs() + (i + j) as f64 * 0.05))
                .collect();
            b.push_row(start, &vals);
        }
        let dense = b.to_dense(n);
        for sign in [1.0, -1.0] {
            let scaled = SquareMatrix::from_fn(n, |i, j| sign * dense.get(i, j));
            let want = logdet_one_minus(&scaled).unwrap();
            let got = logdet_one_minus_symmetric(&b, sign).unwrap();
            assert!((want - got).abs() < 1e-13);
        }
    }

    #[test]
    fn gram_rejects_non_contraction() {
        let b = banded_example(6, 2.0);
        assert!(matches!(
            logdet_one_minus_gram(&b),
            Err(CasimirError::NonContraction(_))
        ));
    }

    #[test]
    fn empty_rows_are_identity() {
        let mut b = BandedRows::new();
        b.push_row(0, &[0.5]);
        b.push_row(1, &[]);
        b.push_row(2, &[0.5]);
        let got = logdet_one_minus_gram(&b).unwrap();
        assert!((got - 2.0 * (0.75_f64).ln()).abs() < 1e-15);
    }

    fn scaled(n: usize, entries: &[f64], norm: f64) -> SquareMatrix {
        let frob = entries[..n * n].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        SquareMatrix::from_fn(n, |i, j| entries[i * n + j] * norm / frob)
    }

    proptest! {
        #[test]
        fn logdet_matches_round_trip_series(
            n in 1usize..10,
            entries in prop::collection::vec(-1.0f64..1.0, 81),
            norm in 0.0f64..0.3,
        ) {
            let m = scaled(n, &entries, norm);
            let mut power = m.clone();
            let mut series = 0.0;
            for p in 1..200 {
                let term = power.trace() / p as f64;
                series -= term;
                if term.abs() < 1e-14 && p > 2 {
                    break;
                }
                power = power.matmul(&m);
            }
            let got = logdet_one_minus(&m).unwrap();
            prop_assert!((got - series).abs() < 1e-10, "{got} vs {series}");
        }

        #[test]
        fn logdet_matches_eigenvalue_product(
            entries in prop::collection::vec(-1.0f64..1.0, 64),
            norm in 0.0f64..0.5,
        ) {
            let m = scaled(8, &entries, norm);
            let dense = nalgebra::DMatrix::from_fn(8, 8, |i, j| m.get(i, j));
            let det = dense
                .complex_eigenvalues()
                .iter()
                .fold(nalgebra::Complex::new(1.0, 0.0), |acc, l| acc * (1.0 - l));
            prop_assert!(det.im.abs() < 1e-12);
            prop_assert!((logdet_one_minus(&m).unwrap() - det.re.ln()).abs() < 1e-10);
        }
    }
}
