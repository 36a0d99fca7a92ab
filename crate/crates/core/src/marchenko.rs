//! The kernel `A(r, t)` of the representation
//! `f(k, r) = e^{ikr} + ∫_r^∞ A(r, t) e^{ikt} dt`.
//!
//! In the characteristic variables `x = (r+t)/2`, `y = (t-r)/2` the kernel
//! `K(x, y) = A(x-y, x+y)` solves
//!
//! ```text
//! K(x, y) = ½ W(x) + ∫_x^∞ ds ∫_0^y V(s-u) K(s, u) du,   W(x) = ∫_x^∞ V.
//! ```
//!
//! The equation is discretised on the lattice `x = aη`, `y = bη`
//! (`η = h/2`, `0 <= b <= a <= 2N`), whose points with `a + b` even are
//! exactly the grid pairs `(r_i, t_j)`: `a = i + j`, `b = j - i`. Both inner
//! integrals use the trapezoid rule, and the system is solved by Picard
//! iteration from the Born term `½ W(x)`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::io::write_csv;
use crate::potential::Potential;
use crate::quadrature::{filon_complex, filon_first_interval_weights, UniformFilon};
use crate::schrodinger::{SolutionKind, WaveSolution};

/// `A(r_i, t_j)` for `0 <= i <= j <= N` on a uniform grid.
#[derive(Debug, Clone)]
pub struct TriangularKernel {
    grid: RadialGrid,
    potential: Potential,
    /// Row-major triangle: row `i` holds `t_j` for `j = i..=N`.
    values: Vec<f64>,
    iterations: usize,
    converged: bool,
    last_update: f64,
}

fn row_offset(n: usize, i: usize) -> usize {
    i * (n + 1) - i * i.saturating_sub(1) / 2
}

impl TriangularKernel {
    /// Number of intervals `N` of the underlying grid.
    pub fn intervals(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Sup-norm of the last Picard update.
    pub fn last_update(&self) -> f64 {
        self.last_update
    }

    fn step(&self) -> f64 {
        self.grid.r_max() / self.intervals() as f64
    }

    /// Row `i`: `A(r_i, t_j)` for `j = i..=N`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.intervals();
        let start = row_offset(n, i);
        &self.values[start..start + (n - i + 1)]
    }

    /// `A(r_i, t_j)`, `i <= j`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        self.row(i)[j - i]
    }

    /// All stored values in row-major triangle order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `A(r, t)` for `0 <= r <= t`. Inside the grid it interpolates linearly
    /// (bilinear on squares, linear on the diagonal triangles); beyond
    /// `R_max` in `t` it returns the Born term `½ W((r+t)/2)`. Zero for `t < r`.
    pub fn value(&self, r: f64, t: f64) -> f64 {
        if t < r || r < 0.0 {
            return 0.0;
        }
        let rm = self.grid.r_max();
        if t > rm {
            return 0.5 * self.potential.tail_integral(0.5 * (r + t));
        }
        let n = self.intervals();
        let h = self.step();
        let i = ((r / h).floor() as usize).min(n - 1);
        let j = ((t / h).floor() as usize).min(n - 1).max(i);
        let fr = (r / h - i as f64).clamp(0.0, 1.0);
        let ft = (t / h - j as f64).clamp(0.0, 1.0);
        if i < j {
            let a00 = self.at(i, j);
            let a10 = self.at(i + 1, j);
            let a01 = self.at(i, j + 1);
            let a11 = self.at(i + 1, j + 1);
            a00 * (1.0 - fr) * (1.0 - ft) + a10 * fr * (1.0 - ft) + a01 * (1.0 - fr) * ft + a11 * fr * ft
        } else {
            let a00 = self.at(i, i);
            let a01 = self.at(i, i + 1);
            let a11 = self.at(i + 1, i + 1);
            a00 + ft * (a01 - a00) + fr * (a11 - a01)
        }
    }

    /// `max_r ∫_r^{R_max} A(r, t) dt` (trapezoid), used by boundedness checks.
    pub fn max_row_integral(&self) -> f64 {
        let h = self.step();
        (0..=self.intervals())
            .map(|i| {
                let row = self.row(i);
                if row.len() < 2 {
                    0.0
                } else {
                    h * (row.iter().sum::<f64>() - 0.5 * (row[0] + row[row.len() - 1]))
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// CSV triples `r, t, A`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let nodes = self.grid.nodes();
        let n = self.intervals();
        let rows = (0..=n).flat_map(move |i| (i..=n).map(move |j| (i, j))).map(|(i, j)| {
            vec![nodes[i], nodes[j], self.at(i, j)]
        });
        write_csv(w, &["r", "t", "A"], rows)
    }

    /// Binary dump, little-endian: `N` as u64, `R_max` as f64, then the
    /// `(N+1)(N+2)/2` values of the row-major triangle as f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.intervals() as u64).to_le_bytes())?;
        w.write_all(&self.grid.r_max().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the header and values written by [`Self::write_binary`].
    pub fn read_binary<R: Read>(mut r: R) -> Result<(usize, f64, Vec<f64>)> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let r_max = f64::from_le_bytes(b8);
        let count = (n + 1) * (n + 2) / 2;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        Ok((n, r_max, values))
    }
}

/// Lattice state `K(a, b)`, `0 <= b <= a <= m`, flattened at `a(a+1)/2 + b`.
struct Lattice {
    m: usize,
    eta: f64,
    born: Vec<f64>,
    /// `V(c η)` for `c = 0..=m`, with jump points averaged.
    v: Vec<f64>,
}

impl Lattice {
    fn new(v: &Potential, grid: &RadialGrid) -> Result<Self> {
        let h = grid
            .uniform_step()
            .ok_or_else(|| Error::InvalidGrid("the kernel needs a uniform grid".into()))?;
        let n = grid.len() - 1;
        let m = 2 * n;
        let eta = 0.5 * h;
        let born = (0..=m).map(|a| 0.5 * v.tail_integral(a as f64 * eta)).collect();
        let vs = (0..=m).map(|c| v.value_mean(c as f64 * eta)).collect();
        Ok(Self { m, eta, born, v: vs })
    }

    fn idx(a: usize, b: usize) -> usize {
        a * (a + 1) / 2 + b
    }

    fn initial(&self) -> Vec<f64> {
        let mut k = vec![0.0; Self::idx(self.m, self.m) + 1];
        for a in 0..=self.m {
            for b in 0..=a {
                k[Self::idx(a, b)] = self.born[a];
            }
        }
        k
    }

    /// One Picard sweep; returns the new iterate and the sup-norm update.
    fn sweep(&self, old: &[f64]) -> (Vec<f64>, f64) {
        let m = self.m;
        let half = 0.5 * self.eta;
        let mut new = vec![0.0; old.len()];
        let mut acc = vec![0.0; m + 1]; // I(a+1, b)
        let mut g_prev = vec![0.0; m + 1]; // G(a+1, b)
        let mut g_cur = vec![0.0; m + 1];
        let mut update: f64 = 0.0;
        for a in (0..=m).rev() {
            let row = &old[Self::idx(a, 0)..=Self::idx(a, a)];
            g_cur[0] = 0.0;
            for b in 1..=a {
                g_cur[b] = g_cur[b - 1] + half * (self.v[a - b + 1] * row[b - 1] + self.v[a - b] * row[b]);
            }
            for b in 0..=a {
                let i_ab = if a == m { 0.0 } else { acc[b] + half * (g_cur[b] + g_prev[b]) };
                acc[b] = i_ab;
                let value = self.born[a] + i_ab;
                let at = Self::idx(a, b);
                update = update.max((value - old[at]).abs());
                new[at] = value;
            }
            std::mem::swap(&mut g_prev, &mut g_cur);
        }
        (new, update)
    }

    /// Direct solve of the same discrete equations by marching in `a`
    /// downward and `b` upward; each unknown appears linearly once.
    fn march(&self) -> Vec<f64> {
        let m = self.m;
        let half = 0.5 * self.eta;
        let mut k = vec![0.0; Self::idx(m, m) + 1];
        let mut acc = vec![0.0; m + 1];
        let mut g_prev = vec![0.0; m + 1];
        let mut g_cur = vec![0.0; m + 1];
        for a in (0..=m).rev() {
            for b in 0..=a {
                let base_i = if a == m { 0.0 } else { acc[b] + half * g_prev[b] };
                let w = if a == m { 0.0 } else { half };
                let g_known = if b == 0 {
                    0.0
                } else {
                    g_cur[b - 1] + half * self.v[a - b + 1] * k[Self::idx(a, b - 1)]
                };
                let coef = if b == 0 { 0.0 } else { half * self.v[a - b] };
                // K = born + base_i + w (g_known + coef K)
                let kv = (self.born[a] + base_i + w * g_known) / (1.0 - w * coef);
                k[Self::idx(a, b)] = kv;
                g_cur[b] = if b == 0 { 0.0 } else { g_known + coef * kv };
                acc[b] = base_i + w * g_cur[b];
            }
            std::mem::swap(&mut g_prev, &mut g_cur);
        }
        k
    }

    fn to_triangle(&self, k: &[f64], n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for i in 0..=n {
            for j in i..=n {
                out.push(k[Self::idx(i + j, j - i)]);
            }
        }
        out
    }
}

fn kernel_from(v: &Potential, grid: &RadialGrid, lat: &Lattice, k: &[f64], iterations: usize, converged: bool, last_update: f64) -> TriangularKernel {
    let n = grid.len() - 1;
    TriangularKernel {
        grid: grid.clone(),
        potential: v.clone(),
        values: lat.to_triangle(k, n),
        iterations,
        converged,
        last_update,
    }
}

/// Picard iteration for the kernel until the sup-norm update drops below
/// `tol`. The grid must be uniform.
pub fn solve_kernel(v: &Potential, grid: &RadialGrid, tol: f64, max_iter: usize) -> Result<TriangularKernel> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let lat = Lattice::new(v, grid)?;
    let mut k = lat.initial();
    let mut last = f64::INFINITY;
    for it in 1..=max_iter {
        let (next, update) = lat.sweep(&k);
        k = next;
        last = update;
        if update < tol {
            return Ok(kernel_from(v, grid, &lat, &k, it, true, update));
        }
    }
    Err(Error::KernelNotConverged { iterations: max_iter, last_update: last })
}

/// The first `sweeps` Picard iterates (the Born term is iterate 0), for
/// inspecting the iteration itself.
pub fn kernel_iterates(v: &Potential, grid: &RadialGrid, sweeps: usize) -> Result<Vec<TriangularKernel>> {
    let lat = Lattice::new(v, grid)?;
    let mut k = lat.initial();
    let mut out = vec![kernel_from(v, grid, &lat, &k, 0, false, f64::INFINITY)];
    for it in 1..=sweeps {
        let (next, update) = lat.sweep(&k);
        k = next;
        out.push(kernel_from(v, grid, &lat, &k, it, false, update));
    }
    Ok(out)
}

/// Solves the discrete kernel equations directly (no iteration). Same fixed
/// point as [`solve_kernel`].
pub fn solve_kernel_direct(v: &Potential, grid: &RadialGrid) -> Result<TriangularKernel> {
    let lat = Lattice::new(v, grid)?;
    let k = lat.march();
    Ok(kernel_from(v, grid, &lat, &k, 0, true, 0.0))
}

/// Pointwise comparison with the envelope
/// `½ W((r+t)/2) · exp(∫_r^∞ u V(u) du)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    /// `max(A - envelope, -A)` over the stored nodes; non-positive when the
    /// kernel is non-negative and below the envelope everywhere.
    pub max_violation: f64,
    /// Smallest `envelope - A`.
    pub min_margin: f64,
    pub min_value: f64,
    pub pass: bool,
}

pub const KERNEL_BOUND_TOL: f64 = 1e-8;

pub fn kernel_bound_check(a: &TriangularKernel, v: &Potential) -> KernelBoundReport {
    let nodes = a.grid.nodes();
    let n = a.intervals();
    let mut max_violation = f64::NEG_INFINITY;
    let mut min_margin = f64::INFINITY;
    let mut min_value = f64::INFINITY;
    for i in 0..=n {
        let growth = v.first_moment_tail(nodes[i]).exp();
        for (j, &aij) in (i..=n).zip(a.row(i)) {
            let env = 0.5 * v.tail_integral(0.5 * (nodes[i] + nodes[j])) * growth;
            let margin = env - aij;
            min_margin = min_margin.min(margin);
            min_value = min_value.min(aij);
            max_violation = max_violation.max((-margin).max(-aij));
        }
    }
    KernelBoundReport { max_violation, min_margin, min_value, pass: max_violation <= KERNEL_BOUND_TOL }
}

/// `f(k, r_i) = e^{ikr_i} + ∫_{r_i}^∞ A(r_i, t) e^{ikt} dt` at every node.
///
/// The grid part uses uniform Filon quadrature. Beyond `R_max` the kernel is
/// replaced by its Born term; with `x = (r+t)/2` that tail is
/// `e^{-ikr} ∫_{(r+R)/2}^∞ W(x) e^{2ikx} dx`, accumulated once per `k` on the
/// lattice `x = (N + i) h / 2`. Derivatives are central differences.
pub fn jost_from_kernel(a: &TriangularKernel, k: f64) -> WaveSolution {
    let n = a.intervals();
    let h = a.step();
    let nodes = a.grid.nodes();
    let tails = born_tail(a, k);
    let mut value = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let r = nodes[i];
        let row = a.row(i);
        let inner = match row.len() {
            0 | 1 => Complex64::new(0.0, 0.0),
            2 => {
                let f = [Complex64::new(row[0], 0.0), Complex64::new(row[1], 0.0)];
                filon_complex(&[r, nodes[n]], &f, k)
            }
            len => UniformFilon::new(r, h, len, k).apply(row),
        };
        let tail = Complex64::from_polar(1.0, -k * r) * tails[i];
        value.push(Complex64::from_polar(1.0, k * r) + inner + tail);
    }
    let mut deriv = vec![Complex64::new(0.0, 0.0); n + 1];
    for i in 0..=n {
        deriv[i] = if i == 0 {
            (-3.0 * value[0] + 4.0 * value[1] - value[2]) / (2.0 * h)
        } else if i == n {
            (3.0 * value[n] - 4.0 * value[n - 1] + value[n - 2]) / (2.0 * h)
        } else {
            (value[i + 1] - value[i - 1]) / (2.0 * h)
        };
    }
    WaveSolution::new(k, SolutionKind::Jost, a.grid.clone(), value, deriv, 0.0)
}

/// `T_i = ∫_{x_i}^∞ ½ W(x) e^{2ikx} dx` at `x_i = (N + i) η`, `i = 0..=N`.
fn born_tail(a: &TriangularKernel, k: f64) -> Vec<Complex64> {
    let n = a.intervals();
    let eta = 0.5 * a.step();
    let v = &a.potential;
    let x0 = n as f64 * eta;
    let w0 = v.tail_integral(x0);
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    if w0 == 0.0 {
        return out;
    }
    // Extend the lattice until W is negligible.
    let mut m = 2 * n;
    while v.tail_integral(x0 + m as f64 * eta) > 1e-17 * w0.max(1e-300) && m < 400 * n.max(1) {
        m *= 2;
    }
    let samples: Vec<f64> = (0..=m + 1).map(|c| 0.5 * v.tail_integral(x0 + c as f64 * eta)).collect();
    let w = filon_first_interval_weights(eta, 2.0 * k);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tail = vec![Complex64::new(0.0, 0.0); m + 1];
    for c in (0..m).rev() {
        let phase = Complex64::from_polar(1.0, 2.0 * k * (x0 + c as f64 * eta));
        acc += phase * (w[0] * samples[c] + w[1] * samples[c + 1] + w[2] * samples[c + 2]);
        tail[c] = acc;
    }
    out.copy_from_slice(&tail[..=n]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r: f64, n: usize) -> RadialGrid {
        RadialGrid::uniform(r, n).unwrap()
    }

    #[test]
    fn triangle_layout() {
        for n in [2usize, 3, 7] {
            let mut expect = 0;
            for i in 0..=n {
                assert_eq!(row_offset(n, i), expect);
                expect += n - i + 1;
            }
        }
    }

    #[test]
    fn free_kernel_vanishes_in_one_sweep() {
        let a = solve_kernel(&Potential::zero(), &grid(5.0, 50), 1e-12, 10).unwrap();
        assert_eq!(a.iterations(), 1);
        assert!(a.values().iter().all(|&x| x == 0.0));
        let f = jost_from_kernel(&a, 2.0);
        for (r, z) in f.nodes().iter().zip(f.values()) {
            assert!((z - Complex64::from_polar(1.0, 2.0 * r)).norm() < 1e-15);
        }
        assert!(kernel_bound_check(&a, &Potential::zero()).pass);
    }

    #[test]
    fn picard_reaches_the_direct_solution() {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let g = grid(10.0, 200);
        let a = solve_kernel(&v, &g, 1e-13, 200).unwrap();
        let d = solve_kernel_direct(&v, &g).unwrap();
        let gap = a.values().iter().zip(d.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-12, "gap {gap}");
    }

    #[test]
    fn weak_potential_is_born_dominated() {
        let v = Potential::exponential(1e-4, 1.0).unwrap();
        let g = grid(10.0, 200);
        let a = solve_kernel(&v, &g, 1e-14, 50).unwrap();
        let nodes = g.nodes();
        for i in (0..=200).step_by(10) {
            for j in (i..=200).step_by(10) {
                let born = 0.5 * v.tail_integral(0.5 * (nodes[i] + nodes[j]));
                assert!((a.at(i, j) - born).abs() <= 1e-3 * born);
            }
        }
    }

    #[test]
    fn barrier_kernel_support() {
        let v = Potential::square_barrier(2.0, 1.0).unwrap();
        let g = grid(4.0, 80);
        let a = solve_kernel(&v, &g, 1e-12, 100).unwrap();
        let nodes = g.nodes();
        for i in 0..=80 {
            for j in i..=80 {
                if 0.5 * (nodes[i] + nodes[j]) > 1.0 + 1e-12 {
                    assert_eq!(a.at(i, j), 0.0);
                }
            }
        }
        assert!(kernel_bound_check(&a, &v).pass);
    }

    #[test]
    fn iterates_are_monotone() {
        let v = Potential::gaussian(2.0, 1.0).unwrap();
        let its = kernel_iterates(&v, &grid(6.0, 60), 5).unwrap();
        for w in its.windows(2) {
            for (x, y) in w[0].values().iter().zip(w[1].values()) {
                assert!(y >= x);
            }
        }
    }

    #[test]
    fn interpolation_and_born_extension() {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let g = grid(8.0, 80);
        let a = solve_kernel(&v, &g, 1e-12, 100).unwrap();
        assert_eq!(a.value(0.3, 0.5), a.at(3, 5));
        let mid = a.value(0.35, 0.55);
        let lo = a.at(3, 5).min(a.at(4, 6));
        let hi = a.at(3, 5).max(a.at(4, 6));
        assert!(mid >= lo.min(a.at(3, 6)).min(a.at(4, 5)) && mid <= hi.max(a.at(3, 6)).max(a.at(4, 5)));
        assert_eq!(a.value(1.0, 9.0), 0.5 * v.tail_integral(5.0));
        assert_eq!(a.value(2.0, 1.0), 0.0);
    }

    #[test]
    fn binary_dump_round_trip() {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let a = solve_kernel(&v, &grid(2.0, 10), 1e-12, 100).unwrap();
        let mut buf = Vec::new();
        a.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 66);
        let (n, r, vals) = TriangularKernel::read_binary(&buf[..]).unwrap();
        assert_eq!((n, r), (10, 2.0));
        assert_eq!(vals, a.values());
    }

    #[test]
    fn graded_grid_rejected() {
        let g = RadialGrid::graded(5.0, 40, 1.05).unwrap();
        assert!(matches!(solve_kernel(&Potential::zero(), &g, 1e-10, 5), Err(Error::InvalidGrid(_))));
    }
}
