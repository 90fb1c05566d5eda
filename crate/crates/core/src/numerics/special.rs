//! Special functions used by the scattering kernels.

use super::NeumaierSum;

/// `ln k!` for `k = 0 ..= n`, accumulated with compensated summation.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = NeumaierSum::default();
    out.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        out.push(acc.total());
    }
    out
}

/// `(e^x K₀(x), e^x K₁(x))` for `x > 0`.
///
/// Below `x = 25` the integral `∫₀^∞ exp(-x(cosh t - 1)) cosh(νt) dt` is
/// evaluated with the trapezoidal rule, which converges geometrically for
/// this entire integrand; above it the Hankel asymptotic series is used.
pub fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x > 25.0 {
        return (k_asymptotic(0.0, x), k_asymptotic(1.0, x));
    }
    const H: f64 = 0.05;
    let mut k0 = 0.5;
    let mut k1 = 0.5;
    let mut i = 1;
    loop {
        let t = H * f64::from(i);
        let g = (-x * (t.cosh() - 1.0)).exp();
        let c = t.cosh();
        k0 += g;
        k1 += g * c;
        if g * c < 1e-18 * k1 {
            break;
        }
        i += 1;
    }
    (k0 * H, k1 * H)
}

fn k_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let kf = f64::from(k);
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (std::f64::consts::PI / (2.0 * x)).sqrt() * sum
}

/// `e^{-x} I₀(x)` for `x ≥ 0`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    if x <= 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            let odd = 2.0 * f64::from(k) - 1.0;
            term *= odd * odd / (f64::from(k) * 8.0 * x);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// `I_{ν+1}(x)/I_ν(x)` from the continued fraction, modified Lentz.
fn bessel_i_ratio_cf(nu: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let xi = 1.0 / x;
    let mut b = 2.0 * (nu + 1.0) * xi;
    let mut f = b;
    let mut c = b;
    let mut d = 0.0;
    // f = b₁ + 1/(b₂ + 1/(b₃ + …)); the ratio is 1/f
    for _ in 0..10_000_000 {
        b += 2.0 * xi;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Logarithms of modified Bessel functions of integer order, and of the
/// derivative magnitudes, at one argument.
#[derive(Debug, Clone)]
pub struct BesselTable {
    /// `ln I_n(x)`, `n = 0 ..= n_max`
    pub ln_i: Vec<f64>,
    /// `ln I_n'(x)`
    pub ln_i_prime: Vec<f64>,
    /// `ln K_n(x)`
    pub ln_k: Vec<f64>,
    /// `ln |K_n'(x)|`
    pub ln_k_prime: Vec<f64>,
}

impl BesselTable {
    pub fn new(x: f64, n_max: usize) -> Self {
        Self {
            ln_i: Vec::new(),
            ln_i_prime: Vec::new(),
            ln_k: Vec::new(),
            ln_k_prime: Vec::new(),
        }
        .fill_i(x, n_max)
        .fill_k(x, n_max)
    }

    fn fill_i(mut self, x: f64, n_max: usize) -> Self {
        // ratios[n] = I_n / I_{n-1}, n = 1 ..= n_max + 1
        let top = n_max + 1;
        let mut ratios = vec![0.0; top + 1];
        ratios[top] = bessel_i_ratio_cf((top - 1) as f64, x);
        for n in (1..top).rev() {
            ratios[n] = 1.0 / (2.0 * n as f64 / x + ratios[n + 1]);
        }
        let mut ln_i = bessel_i0_scaled(x).ln() + x;
        for n in 0..=n_max {
            if n > 0 {
                ln_i += ratios[n].ln();
            }
            self.ln_i.push(ln_i);
            // I_n' = I_{n+1} + (n/x) I_n
            self.ln_i_prime
                .push(ln_i + (ratios[n + 1] + n as f64 / x).ln());
        }
        self
    }

    fn fill_k(mut self, x: f64, n_max: usize) -> Self {
        let (k0, k1) = bessel_k01_scaled(x);
        let mut ln_k = k0.ln() - x;
        // rho = K_n / K_{n-1}
        let mut rho = k1 / k0;
        self.ln_k.push(ln_k);
        // |K_0'| = K_1
        self.ln_k_prime.push(k1.ln() - x);
        for n in 1..=n_max {
            if n > 1 {
                rho = 1.0 / rho + 2.0 * (n - 1) as f64 / x;
            }
            ln_k += rho.ln();
            self.ln_k.push(ln_k);
            // |K_n'| = K_{n-1} + (n/x) K_n
            self.ln_k_prime.push(ln_k + (1.0 / rho + n as f64 / x).ln());
        }
        self
    }
}

/// `ln K_n(x)` for `n = 0 ..= n_max` by upward recurrence of ratios.
pub fn ln_bessel_k_sequence(x: f64, n_max: usize) -> Vec<f64> {
    let (k0, k1) = bessel_k01_scaled(x);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut ln_k = k0.ln() - x;
    out.push(ln_k);
    let mut rho = k1 / k0;
    for n in 1..=n_max {
        if n > 1 {
            rho = 1.0 / rho + 2.0 * (n - 1) as f64 / x;
        }
        ln_k += rho.ln();
        out.push(ln_k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    // Reference values computed at 40 digits with mpmath.
    #[test]
    fn k01_against_reference() {
        let cases = [
            (1e-06, 13.931456005075459, 1000000.9999932843),
            (0.1, 2.6823261022628944, 10.890182683049696),
            (1.0, 1.144463079806895, 1.6361534862632583),
            (10.0, 0.39163193443659866, 0.41076657059578875),
            (24.9, 0.24993215015402473, 0.25490238558081707),
            (25.1, 0.24894399546328752, 0.25385550089505654),
            (400.0, 0.06264615129957811, 0.06272441016827716),
        ];
        for (x, k0, k1) in cases {
            let (a, b) = bessel_k01_scaled(x);
            assert!(rel(a, k0) < 5e-15, "K0({x}) {a} vs {k0}");
            assert!(rel(b, k1) < 5e-15, "K1({x}) {b} vs {k1}");
        }
    }

    #[test]
    fn i0_against_reference() {
        for (x, want) in [
            (0.0, 1.0),
            (0.5, 0.6450352704491501),
            (29.9, 0.07326921904600191),
            (30.1, 0.07302329413106094),
            (1000.0, 0.012617240455891257),
        ] {
            assert!(rel(bessel_i0_scaled(x), want) < 5e-15, "{x}");
        }
    }

    #[test]
    fn table_against_reference() {
        // (x, n, ln I_n, ln I_n', ln K_n, ln |K_n'|)
        let cases = [
            (0.3, 7, -21.802189194554995, -18.651503243209262, 19.16219533014745, 22.313148337319085),
            (5.0, 0, 3.3046817758225333, 3.1919420305456754, -5.601831213717063, -5.510369296585223),
            (5.0, 40, -73.51684675502067, -71.42983942444299, 69.12706338198927, 71.21445257503156),
            (200.0, 150, 142.348453408369, 142.57031717217149, -148.56306253081272, -148.33863878232367),
        ];
        for (x, n, li, lip, lk, lkp) in cases {
            let t = BesselTable::new(x, n + 2);
            assert!((t.ln_i[n] - li).abs() < 1e-12 * li.abs().max(1.0), "ln I_{n}({x})");
            assert!((t.ln_i_prime[n] - lip).abs() < 1e-12 * lip.abs().max(1.0), "ln I'_{n}({x})");
            assert!((t.ln_k[n] - lk).abs() < 1e-12 * lk.abs().max(1.0), "ln K_{n}({x})");
            assert!((t.ln_k_prime[n] - lkp).abs() < 1e-12 * lkp.abs().max(1.0), "ln K'_{n}({x})");
            let seq = ln_bessel_k_sequence(x, n);
            assert_eq!(seq[n], t.ln_k[n]);
        }
    }

    #[test]
    fn wronskian_holds() {
        // I_n K_{n+1} + I_{n+1} K_n = 1/x
        for x in [0.01, 0.7, 3.0, 40.0, 900.0] {
            let t = BesselTable::new(x, 60);
            for n in 0..60 {
                let w = (t.ln_i[n] + t.ln_k[n + 1]).exp() + (t.ln_i[n + 1] + t.ln_k[n]).exp();
                assert!(rel(w * x, 1.0) < 1e-12, "x={x} n={n}");
            }
        }
    }

    #[test]
    fn ln_factorial_table() {
        let t = ln_factorials(200);
        assert_eq!(t[0], 0.0);
        assert!((t[5] - 120f64.ln()).abs() < 1e-15);
        // ln 200! from mpmath
        assert!((t[200] - 863.2319871924054).abs() < 1e-12);
    }
}
