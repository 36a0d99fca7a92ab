//! Fixed-step classical Runge–Kutta integration on a node list.
//!
//! The state is a small array of real or complex amplitudes. Integration
//! runs node to node (in either direction) with a caller-chosen number of
//! substeps per interval, and splits intervals at interior cut points so
//! that a discontinuous right-hand side only jumps at step boundaries.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Scalar type of an ODE state component.
pub trait Scalar: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

fn axpy<T: Scalar, const N: usize>(y: &[T; N], h: f64, k: &[T; N]) -> [T; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + k[i] * h;
    }
    out
}

/// One RK4 step of size `h` (may be negative). The right-hand side receives
/// `(x, piece_lo, y)`, where `piece_lo` is the lower end of the smooth piece
/// containing the step; a stage evaluated exactly at `piece_lo` should use
/// one-sided data from above.
pub fn rk4_step<T, const N: usize, F>(f: &F, x: f64, h: f64, lo: f64, y: &[T; N]) -> [T; N]
where
    T: Scalar,
    F: Fn(f64, f64, &[T; N]) -> [T; N],
{
    let k1 = f(x, lo, y);
    let k2 = f(x + 0.5 * h, lo, &axpy(y, 0.5 * h, &k1));
    let k3 = f(x + 0.5 * h, lo, &axpy(y, 0.5 * h, &k2));
    let k4 = f(x + h, lo, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
    out
}

/// Integrates from `nodes[0]` through every node in order and returns the
/// state at each node. `substeps(a, b)` gives the number of equal steps for
/// a smooth piece `[a, b]`; it is multiplied by `refine`.
pub fn integrate<T, const N: usize, F, S>(
    f: &F,
    nodes: &[f64],
    cuts: &[f64],
    substeps: &S,
    refine: usize,
    y0: [T; N],
) -> Vec<[T; N]>
where
    T: Scalar,
    F: Fn(f64, f64, &[T; N]) -> [T; N],
    S: Fn(f64, f64) -> usize,
{
    let mut out = Vec::with_capacity(nodes.len());
    let mut y = y0;
    out.push(y);
    for w in nodes.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
        let mut pieces: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c < hi).collect();
        if x0 > x1 {
            pieces.reverse();
        }
        pieces.insert(0, x0);
        pieces.push(x1);
        for p in pieces.windows(2) {
            let (a, b) = (p[0], p[1]);
            let plo = a.min(b);
            let m = substeps(plo, a.max(b)).max(1) * refine.max(1);
            let h = (b - a) / m as f64;
            for j in 0..m {
                // x from the piece start each step to avoid drift
                let x = a + j as f64 * h;
                y = rk4_step(f, x, h, plo, &y);
            }
        }
        out.push(y);
    }
    out
}

/// `max |fine - coarse| / 15` relative to `max(1, |fine|)` componentwise.
fn doubling_estimate<T: Scalar, const N: usize>(coarse: &[[T; N]], fine: &[[T; N]]) -> f64 {
    let mut est: f64 = 0.0;
    for (c, y) in coarse.iter().zip(fine) {
        for i in 0..N {
            let d = (y[i] - c[i]).magnitude() / 15.0;
            est = est.max(d / y[i].magnitude().max(1.0));
        }
    }
    est
}

/// Runs [`integrate`] at `refine` and `2 * refine` and returns the finer
/// solution with the step-doubling estimate `max |fine - coarse| / 15`,
/// measured relative to `max(1, |fine|)` componentwise.
pub fn integrate_with_estimate<T, const N: usize, F, S>(
    f: &F,
    nodes: &[f64],
    cuts: &[f64],
    substeps: &S,
    y0: [T; N],
) -> (Vec<[T; N]>, f64)
where
    T: Scalar,
    F: Fn(f64, f64, &[T; N]) -> [T; N],
    S: Fn(f64, f64) -> usize,
{
    integrate_to_tolerance(f, nodes, cuts, substeps, y0, f64::INFINITY, 2)
}

/// Halves the step until the step-doubling estimate is at most `tol` or the
/// refinement factor reaches `max_refine`. Returns the finest solution and
/// its estimate; the caller decides whether the estimate is acceptable.
pub fn integrate_to_tolerance<T, const N: usize, F, S>(
    f: &F,
    nodes: &[f64],
    cuts: &[f64],
    substeps: &S,
    y0: [T; N],
    tol: f64,
    max_refine: usize,
) -> (Vec<[T; N]>, f64)
where
    T: Scalar,
    F: Fn(f64, f64, &[T; N]) -> [T; N],
    S: Fn(f64, f64) -> usize,
{
    let mut refine = 1;
    let mut coarse = integrate(f, nodes, cuts, substeps, refine, y0);
    loop {
        let fine = integrate(f, nodes, cuts, substeps, 2 * refine, y0);
        let est = doubling_estimate(&coarse, &fine);
        refine *= 2;
        if est <= tol || refine >= max_refine {
            return (fine, est);
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        // y'' = -y as a first-order system, exact y = sin x.
        let f = |_x: f64, _lo: f64, y: &[f64; 2]| [y[1], -y[0]];
        let err = |m: usize| {
            let nodes = [0.0, 2.0];
            let y = integrate(&f, &nodes, &[], &|_, _| m, 1, [0.0, 1.0]);
            (y[1][0] - 2f64.sin()).abs()
        };
        let ratio = err(80) / err(160);
        assert!(ratio > 15.0 && ratio < 17.0, "ratio {ratio}");
    }

    #[test]
    fn backward_integration_and_cuts() {
        // y' = step function, jump at 1: exact for RK4 when split at the cut.
        let f = |x: f64, lo: f64, _y: &[f64; 1]| {
            let right = x > 1.0 || (x == 1.0 && lo == 1.0);
            [if right { 0.0 } else { 3.0 }]
        };
        let nodes = [2.0, 0.5, 0.0];
        let y = integrate(&f, &nodes, &[1.0], &|_, _| 1, 1, [0.0]);
        assert!((y[1][0] - (-1.5)).abs() < 1e-14);
        assert!((y[2][0] - (-3.0)).abs() < 1e-14);
    }

    #[test]
    fn step_doubling_estimate_tracks_error() {
        let f = |_x: f64, _lo: f64, y: &[Complex64; 1]| [y[0] * Complex64::new(0.0, 1.0)];
        let nodes = [0.0, 3.0];
        let (y, est) = integrate_with_estimate(&f, &nodes, &[], &|_, _| 10, [Complex64::new(1.0, 0.0)]);
        let err = (y[1][0] - Complex64::from_polar(1.0, 3.0)).norm();
        assert!(est > 0.2 * err && est < 5.0 * err, "est {est} err {err}");
    }
}
