//! Quadrature on sampled data and for oscillatory integrands.
//!
//! Oscillatory integrals `∫ f(x) e^{iωx} dx` use Filon's idea: `f` is
//! replaced by its piecewise-quadratic interpolant and the products with
//! `e^{iωx}` are integrated exactly, so accuracy does not degrade when the
//! step is comparable to the period.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl12() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

/// Composite 12-point Gauss–Legendre over `[a, b]` with `panels` equal panels,
/// additionally split at every breakpoint inside the interval.
pub fn gauss_legendre_composite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    breakpoints: &[f64],
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (xs, ws) = gl12();
    let panels = panels.max(1);
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let n = ((panels as f64 * (hi - lo) / (b - a)).ceil() as usize).max(1);
        let h = (hi - lo) / n as f64;
        for p in 0..n {
            let c = lo + (p as f64 + 0.5) * h;
            let s: f64 = xs.iter().zip(ws).map(|(x, w)| w * f(c + 0.5 * h * x)).sum();
            total += 0.5 * h * s;
        }
    }
    total
}

/// Trapezoidal rule on arbitrary nodes.
pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2)
        .zip(f.windows(2))
        .map(|(xw, fw)| 0.5 * (xw[1] - xw[0]) * (fw[0] + fw[1]))
        .sum()
}

/// Composite Simpson rule on arbitrary nodes (pairs of possibly unequal
/// intervals); a trailing odd interval is integrated with the quadratic
/// through the last three nodes.
pub fn simpson(x: &[f64], f: &[f64]) -> f64 {
    let n = x.len();
    assert_eq!(n, f.len());
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += simpson_pair(x[i], x[i + 1], x[i + 2], f[i], f[i + 1], f[i + 2]);
        i += 2;
    }
    if i + 1 == n - 1 {
        // last interval [x_{n-2}, x_{n-1}] from the quadratic through n-3..n-1
        let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
        let (f0, f1, f2) = (f[n - 3], f[n - 2], f[n - 1]);
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let w0 = -h2 * h2 * h2 / (6.0 * h1 * (h1 + h2));
        let w1 = h2 * (h2 + 3.0 * h1) / (6.0 * h1);
        let w2 = h2 * (2.0 * h2 + 3.0 * h1) / (6.0 * (h1 + h2));
        total += w0 * f0 + w1 * f1 + w2 * f2;
    }
    total
}

fn simpson_pair(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let h0 = x1 - x0;
    let h1 = x2 - x1;
    let hs = h0 + h1;
    hs / 6.0
        * ((2.0 - h1 / h0) * f0 + hs * hs / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2)
}

/// Running trapezoid integrals `∫_{x_i}^{x_last} f` for every node.
pub fn cumulative_trapezoid_from_end(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
    }
    out
}

/// Running trapezoid integrals `∫_{x_0}^{x_i} f` for every node.
pub fn cumulative_trapezoid(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i - 1] + f[i]);
    }
    out
}

/// Integral over each interval `[x_i, x_{i+1}]` of the cubic through the
/// four nearest nodes (shifted inward at the ends). Fourth order on smooth
/// data; needs at least 4 nodes, falls back to trapezoid otherwise.
pub fn interval_integrals_cubic(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 4 {
        return x.windows(2).zip(f.windows(2)).map(|(xw, fw)| 0.5 * (xw[1] - xw[0]) * (fw[0] + fw[1])).collect();
    }
    let gl = gauss_legendre(4);
    (0..n - 1)
        .map(|i| {
            let s = i.saturating_sub(1).min(n - 4);
            let nodes = &x[s..s + 4];
            let (lo, hi) = (x[i], x[i + 1]);
            let mut total = 0.0;
            for (u, w) in gl.0.iter().zip(&gl.1) {
                let t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * u;
                let mut p = 0.0;
                for a in 0..4 {
                    let mut l = 1.0;
                    for b in 0..4 {
                        if a != b {
                            l *= (t - nodes[b]) / (nodes[a] - nodes[b]);
                        }
                    }
                    p += l * f[s + a];
                }
                total += w * p;
            }
            0.5 * (hi - lo) * total
        })
        .collect()
}

/// `∫_{x_i}^{x_last} f` at every node from [`interval_integrals_cubic`].
pub fn cumulative_cubic_from_end(x: &[f64], f: &[f64]) -> Vec<f64> {
    let parts = interval_integrals_cubic(x, f);
    let mut out = vec![0.0; x.len()];
    for i in (0..parts.len()).rev() {
        out[i] = out[i + 1] + parts[i];
    }
    out
}

/// Moments `∫_{a}^{b} u^m e^{iωu} du`, `m = 0, 1, 2`.
fn moments(a: f64, b: f64, omega: f64) -> [Complex64; 3] {
    let len = b - a;
    if (omega * len).abs() <= 2.0 && (omega * a.abs().max(b.abs())).abs() <= 40.0 {
        let (xs, ws) = gl12();
        let mut m = [Complex64::new(0.0, 0.0); 3];
        for (x, w) in xs.iter().zip(ws) {
            let u = 0.5 * (a + b) + 0.5 * len * x;
            let e = Complex64::from_polar(0.5 * len * w, omega * u);
            m[0] += e;
            m[1] += e * u;
            m[2] += e * (u * u);
        }
        return m;
    }
    let ea = Complex64::from_polar(1.0, omega * a);
    let eb = Complex64::from_polar(1.0, omega * b);
    let inv = 1.0 / (I * omega);
    let m0 = (eb - ea) * inv;
    let m1 = (eb * b - ea * a) * inv - m0 * inv;
    let m2 = (eb * (b * b) - ea * (a * a)) * inv - m1 * (2.0 * inv);
    [m0, m1, m2]
}

/// Weights for `∫_{lo}^{hi} p(x) e^{iωx} dx`, `p` the quadratic through
/// `(x0, x1, x2)`, with `[lo, hi]` inside `[x0, x2]`.
fn quadratic_weights(x0: f64, x1: f64, x2: f64, lo: f64, hi: f64, omega: f64) -> [Complex64; 3] {
    let (u0, u2) = (x0 - x1, x2 - x1);
    let m = moments(lo - x1, hi - x1, omega);
    let phase = Complex64::from_polar(1.0, omega * x1);
    // Lagrange basis in u with nodes (u0, 0, u2), as c2 u² + c1 u + c0.
    let l0 = [0.0, -u2, 1.0].map(|c| c / (u0 * (u0 - u2)));
    let l1 = [u0 * u2, -(u0 + u2), 1.0].map(|c| c / (u0 * u2));
    let l2 = [0.0, -u0, 1.0].map(|c| c / (u2 * (u2 - u0)));
    let w = |l: [f64; 3]| phase * (m[0] * l[0] + m[1] * l[1] + m[2] * l[2]);
    [w(l0), w(l1), w(l2)]
}

fn linear_weights(x0: f64, x1: f64, omega: f64) -> [Complex64; 2] {
    let c = 0.5 * (x0 + x1);
    let m = moments(x0 - c, x1 - c, omega);
    let phase = Complex64::from_polar(1.0, omega * c);
    let (u0, u1) = (x0 - c, x1 - c);
    let w0 = phase * (m[0] * (-u1) + m[1]) / (u0 - u1);
    let w1 = phase * (m[0] * (-u0) + m[1]) / (u1 - u0);
    [w0, w1]
}

/// Filon weights `w` with `∫_{x_0}^{x_n} f(x) e^{iωx} dx ≈ Σ w_j f(x_j)`.
pub fn filon_weights(x: &[f64], omega: f64) -> Vec<Complex64> {
    let n = x.len();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return w;
    }
    if n == 2 {
        let lw = linear_weights(x[0], x[1], omega);
        w[0] = lw[0];
        w[1] = lw[1];
        return w;
    }
    let mut i = 0;
    while i + 2 < n {
        let pw = quadratic_weights(x[i], x[i + 1], x[i + 2], x[i], x[i + 2], omega);
        w[i] += pw[0];
        w[i + 1] += pw[1];
        w[i + 2] += pw[2];
        i += 2;
    }
    if i + 1 == n - 1 {
        let pw = quadratic_weights(x[n - 3], x[n - 2], x[n - 1], x[n - 2], x[n - 1], omega);
        w[n - 3] += pw[0];
        w[n - 2] += pw[1];
        w[n - 1] += pw[2];
    }
    w
}

/// Weights for `∫_0^h p(x) e^{iωx} dx`, `p` the quadratic through the
/// samples at `0, h, 2h`. Shift by `x0` by multiplying with `e^{iωx0}`.
pub fn filon_first_interval_weights(h: f64, omega: f64) -> [Complex64; 3] {
    quadratic_weights(0.0, h, 2.0 * h, 0.0, h, omega)
}

/// `∫ f(x) e^{iωx} dx` over the span of `x` for real samples.
pub fn filon(x: &[f64], f: &[f64], omega: f64) -> Complex64 {
    filon_weights(x, omega).iter().zip(f).map(|(w, v)| w * v).sum()
}

/// `∫ f(x) e^{iωx} dx` over the span of `x` for complex samples.
pub fn filon_complex(x: &[f64], f: &[Complex64], omega: f64) -> Complex64 {
    filon_weights(x, omega).iter().zip(f).map(|(w, v)| w * v).sum()
}

/// Filon weights on a uniform grid `x_j = x0 + j h`, reusable across many
/// sample vectors. Cheaper than [`filon_weights`]: the per-panel moments are
/// computed once and rotated from panel to panel.
#[derive(Debug, Clone)]
pub struct UniformFilon {
    n: usize,
    panel: [Complex64; 3],
    rotation: Complex64,
    start: Complex64,
    tail: Option<[Complex64; 3]>,
}

impl UniformFilon {
    pub fn new(x0: f64, h: f64, n: usize, omega: f64) -> Self {
        assert!(n >= 3, "uniform Filon needs at least 3 nodes");
        // Local panel weights for nodes (-h, 0, h), phase referenced to the centre.
        let panel = quadratic_weights(-h, 0.0, h, -h, h, omega);
        let tail = ((n - 1) % 2 == 1).then(|| {
            let c = x0 + (n - 2) as f64 * h;
            let w = quadratic_weights(-h, 0.0, h, 0.0, h, omega);
            let ph = Complex64::from_polar(1.0, omega * c);
            [w[0] * ph, w[1] * ph, w[2] * ph]
        });
        Self {
            n,
            panel,
            rotation: Complex64::from_polar(1.0, 2.0 * omega * h),
            start: Complex64::from_polar(1.0, omega * (x0 + h)),
            tail,
        }
    }

    /// `Σ w_j f_j` for samples on the grid this rule was built for.
    pub fn apply<T: Copy + Into<Complex64>>(&self, f: &[T]) -> Complex64 {
        assert_eq!(f.len(), self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = self.start;
        let mut i = 0;
        while i + 2 < self.n {
            let (a, b, c) = (f[i].into(), f[i + 1].into(), f[i + 2].into());
            acc += phase * (self.panel[0] * a + self.panel[1] * b + self.panel[2] * c);
            phase *= self.rotation;
            i += 2;
        }
        if let Some(t) = self.tail {
            let n = self.n;
            acc += t[0] * f[n - 3].into() + t[1] * f[n - 2].into() + t[2] * f[n - 1].into();
        }
        acc
    }
}

/// Sine and cosine integrals `(Ci(x), Si(x))` for `x > 0`.
pub fn cisi(x: f64) -> (f64, f64) {
    const EULER: f64 = 0.577_215_664_901_532_9;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    let t = x.abs();
    if t == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    let (ci, si) = if t > 2.0 {
        let (re, im) = si_ci_continued_fraction(t);
        (-re, FRAC_PI_2 + im)
    } else {
        let (mut sum, mut sums, mut sumc) = (0.0, 0.0, 0.0);
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        if t < FPMIN.sqrt() {
            sums = t;
        } else {
            for k in 1..200 {
                fact *= t / k as f64;
                let term = fact / k as f64;
                sum += sign * term;
                let err = term / f64::abs(sum);
                if odd {
                    sign = -sign;
                    sums = sum;
                    sum = sumc;
                } else {
                    sumc = sum;
                    sum = sums;
                }
                if err < EPS {
                    break;
                }
                odd = !odd;
            }
        }
        (sumc + t.ln() + EULER, sums)
    };
    (ci, if x < 0.0 { -si } else { si })
}

/// Lentz evaluation of `E_1(it) e^{it}` style continued fraction, returning
/// `h = e^{-it} ∫...` such that `Ci = -Re h`, `Si = π/2 + Im h`.
fn si_ci_continued_fraction(t: f64) -> (f64, f64) {
    const FPMIN: f64 = 1e-300;
    let mut b = Complex64::new(1.0, t);
    let mut c = Complex64::new(1.0 / FPMIN, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..1000 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        c = b + Complex64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let h = Complex64::new(t.cos(), -t.sin()) * h;
    (h.re, h.im)
}

/// `π/2 − Si(x)` for `x >= 0`, without cancellation at large `x`.
pub fn si_complement(x: f64) -> f64 {
    if x > 2.0 {
        -si_ci_continued_fraction(x).1
    } else {
        FRAC_PI_2 - cisi(x).1
    }
}

/// `∫_K^∞ sin(a k)/k dk`.
pub fn sin_over_k_tail(a: f64, k: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.signum() * si_complement(a.abs() * k)
    }
}

/// `∫_K^∞ cos(a k)/k² dk`.
pub fn cos_over_k2_tail(a: f64, k: f64) -> f64 {
    (a * k).cos() / k - a * sin_over_k_tail(a, k)
}

/// `∫_K^∞ sin(a k)/k³ dk`.
pub fn sin_over_k3_tail(a: f64, k: f64) -> f64 {
    (a * k).sin() / (2.0 * k * k) + 0.5 * a * cos_over_k2_tail(a, k)
}

/// `∫_K^∞ sin(a k)/k² dk`.
pub fn sin_over_k2_tail(a: f64, k: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    (a * k).sin() / k - a * cisi(a.abs() * k).0
}

/// `∫_K^∞ e^{iak}/k² dk`.
pub fn exp_over_k2_tail(a: f64, k: f64) -> Complex64 {
    Complex64::new(cos_over_k2_tail(a, k), sin_over_k2_tail(a, k))
}

/// `∫_K^∞ e^{iak}/k³ dk`.
pub fn exp_over_k3_tail(a: f64, k: f64) -> Complex64 {
    let cos3 = (a * k).cos() / (2.0 * k * k) - 0.5 * a * sin_over_k2_tail(a, k);
    Complex64::new(cos3, sin_over_k3_tail(a, k))
}

/// Power-law extrapolation of `∫_{x2}^∞ f` from two positive samples
/// `f(x1), f(x2)` with `x1 < x2`; `None` when the fitted decay is not faster
/// than `1/x`.
pub fn power_law_tail(x1: f64, f1: f64, x2: f64, f2: f64) -> Option<f64> {
    if f2 == 0.0 {
        return Some(0.0);
    }
    if !(f1 > 0.0 && f2 > 0.0 && x2 > x1 && x1 > 0.0) {
        return None;
    }
    let q = (f1 / f2).ln() / (x2 / x1).ln();
    if q > 1.0 {
        // For very fast (exponential) decay this overestimates, which is the safe side.
        Some(f2 * x2 / (q - 1.0))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert_abs_diff_eq!(s, 2.0 / 23.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_gl_with_breakpoint() {
        let f = |x: f64| if x < 1.0 { 2.0 } else { 0.0 };
        assert_abs_diff_eq!(gauss_legendre_composite(f, 0.0, 3.0, 7, &[1.0]), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_is_exact_for_cubics_on_uneven_pairs() {
        let x = [0.0, 0.3, 1.0, 1.2, 2.0, 2.1];
        let f: Vec<f64> = x.iter().map(|t| 1.0 + t * t).collect();
        // last odd interval uses the quadratic rule, exact for quadratics
        assert_abs_diff_eq!(simpson(&x, &f), 2.1 + 2.1f64.powi(3) / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn filon_exact_for_quadratics_at_any_frequency() {
        // ∫_0^2 x² e^{iωx} dx closed form.
        let exact = |w: f64| {
            let e = Complex64::from_polar(1.0, 2.0 * w);
            let iw = I * w;
            e * (4.0 / iw - 4.0 / (iw * iw) + 2.0 / (iw * iw * iw)) - 2.0 / (iw * iw * iw)
        };
        let x: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let f: Vec<f64> = x.iter().map(|t| t * t).collect();
        for w in [0.7, 5.0, 90.0] {
            let got = filon(&x, &f, w);
            assert!((got - exact(w)).norm() < 1e-12, "omega {w}: {got} vs {}", exact(w));
            let uf = UniformFilon::new(0.0, 0.25, 9, w).apply(&f);
            assert!((uf - exact(w)).norm() < 1e-12);
        }
    }

    #[test]
    fn filon_small_frequency_matches_gauss_legendre() {
        // The closed form cancels badly at small ω, so compare against GL instead.
        let x: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let f: Vec<f64> = x.iter().map(|t| t * t).collect();
        let w = 0.01;
        let re = gauss_legendre_composite(|t| t * t * (w * t).cos(), 0.0, 2.0, 4, &[]);
        let im = gauss_legendre_composite(|t| t * t * (w * t).sin(), 0.0, 2.0, 4, &[]);
        assert!((filon(&x, &f, w) - Complex64::new(re, im)).norm() < 1e-14);
    }

    #[test]
    fn filon_odd_interval_count() {
        let x: Vec<f64> = (0..=7).map(|i| i as f64 * 0.3).collect();
        let f: Vec<f64> = x.iter().map(|t| 2.0 - t).collect();
        let b = 2.1f64;
        let w = 3.0;
        let iw = I * w;
        // ∫_0^b (2 - x) e^{iωx} dx
        let e = Complex64::from_polar(1.0, w * b);
        let exact = (e * (2.0 - b) - 2.0) / iw + (e - 1.0) / (iw * iw);
        assert!((filon(&x, &f, w) - exact).norm() < 1e-13);
        assert!((UniformFilon::new(0.0, 0.3, 8, w).apply(&f) - exact).norm() < 1e-13);
    }

    #[test]
    fn sine_integral_values() {
        // Reference values (Abramowitz & Stegun Table 5.1).
        assert_abs_diff_eq!(cisi(1.0).1, 0.946_083_070_367_183, epsilon = 1e-14);
        assert_abs_diff_eq!(cisi(1.0).0, 0.337_403_922_900_968_1, epsilon = 1e-14);
        assert_abs_diff_eq!(cisi(10.0).1, 1.658_347_594_218_874, epsilon = 1e-14);
        assert_abs_diff_eq!(cisi(10.0).0, -0.045_456_433_004_455_37, epsilon = 1e-14);
        assert_abs_diff_eq!(si_complement(1e6), (1e6f64).cos() / 1e6, epsilon = 1e-11);
    }

    #[test]
    fn oscillatory_tails_against_quadrature() {
        // ∫_K^L g(k) dk + asymptotic remainder, checked with fine GL.
        let (a, k0) = (1.3, 4.0);
        let far = 4000.0;
        let num2 = gauss_legendre_composite(|k| (a * k).cos() / (k * k), k0, far, 40000, &[]);
        let rem2 = cos_over_k2_tail(a, far);
        assert_abs_diff_eq!(num2 + rem2, cos_over_k2_tail(a, k0), epsilon = 1e-12);
        let num3 = gauss_legendre_composite(|k| (a * k).sin() / (k * k * k), k0, far, 40000, &[]);
        assert_abs_diff_eq!(
            num3 + sin_over_k3_tail(a, far),
            sin_over_k3_tail(a, k0),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(cos_over_k2_tail(0.0, 5.0), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn cubic_intervals_exact_for_cubics() {
        let x = [0.0, 0.1, 0.35, 0.5, 0.9, 1.0];
        let f: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + t * t * t).collect();
        let c = cumulative_cubic_from_end(&x, &f);
        let anti = |t: f64| t - t * t + t.powi(4) / 4.0;
        for (i, &t) in x.iter().enumerate() {
            assert_abs_diff_eq!(c[i], anti(1.0) - anti(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn power_law_tail_estimate() {
        // f = x^{-3}: ∫_x^∞ = 1/(2x²)
        let t = power_law_tail(10.0, 1e-3, 20.0, 1.0 / 8000.0).unwrap();
        assert_abs_diff_eq!(t, 1.0 / 800.0, epsilon = 1e-12);
        assert!(power_law_tail(10.0, 0.1, 20.0, 0.05).is_none());
    }

    #[test]
    fn complex_power_tails() {
        for a in [0.0, 0.3, -2.0, 7.5] {
            for k0 in [0.5, 2.0, 40.0] {
                // split at k0 + L: finite part by GL, remainder by the closed form
                let l = 60.0;
                let panels = 4000;
                let re2 = gauss_legendre_composite(|k| (a * k).cos() / (k * k), k0, k0 + l, panels, &[]);
                let im2 = gauss_legendre_composite(|k| (a * k).sin() / (k * k), k0, k0 + l, panels, &[]);
                let e2 = Complex64::new(re2, im2) + exp_over_k2_tail(a, k0 + l);
                assert!((e2 - exp_over_k2_tail(a, k0)).norm() < 1e-12, "a={a} k={k0}");
                let re3 = gauss_legendre_composite(|k| (a * k).cos() / k.powi(3), k0, k0 + l, panels, &[]);
                let im3 = gauss_legendre_composite(|k| (a * k).sin() / k.powi(3), k0, k0 + l, panels, &[]);
                let e3 = Complex64::new(re3, im3) + exp_over_k3_tail(a, k0 + l);
                assert!((e3 - exp_over_k3_tail(a, k0)).norm() < 1e-12, "a={a} k={k0}");
            }
        }
        assert_eq!(exp_over_k2_tail(0.0, 4.0), Complex64::new(0.25, 0.0));
        assert_eq!(exp_over_k3_tail(0.0, 2.0), Complex64::new(0.125, 0.0));
    }
}
