//! Regular, zero-energy and Jost solutions of `-y'' + V y = k² y` on the
//! half-line.
//!
//! Solutions are never integrated in `(y, y')` directly. Each is written as
//! `y = a·u₁ + b·u₂` over the free solutions (`sin kr / k`, `cos kr` for the
//! regular problem; `e^{±ikr}` for the Jost problem) and RK4 advances the
//! slowly varying amplitudes `(a, b)`. The free case is then exact, and the
//! phase of the regular solution is available in closed form from `(a, b)`:
//! `kφ = A sin(kr + δ)` with `A cos δ = a`, `A sin δ = k b`, and
//! `φ'² + k²φ² = a² + k²b²`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::io::write_csv;
use crate::ode::{integrate, integrate_to_tolerance};
use crate::potential::Potential;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which boundary problem a [`WaveSolution`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    /// `φ(0) = 0`, `φ'(0) = 1`.
    Regular,
    /// `f ~ e^{ikr}` at infinity.
    Jost,
    /// The zero-energy solution `χ₀` with `χ₀(0) = 1` and unit Wronskian
    /// against `φ₀`.
    ZeroEnergyIrregular,
}

/// A solution and its derivative sampled on the nodes of a grid.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    k: f64,
    kind: SolutionKind,
    grid: RadialGrid,
    value: Vec<Complex64>,
    deriv: Vec<Complex64>,
    error_estimate: f64,
}

impl WaveSolution {
    pub(crate) fn new(
        k: f64,
        kind: SolutionKind,
        grid: RadialGrid,
        value: Vec<Complex64>,
        deriv: Vec<Complex64>,
        error_estimate: f64,
    ) -> Self {
        debug_assert_eq!(value.len(), grid.len());
        debug_assert_eq!(deriv.len(), grid.len());
        Self { k, kind, grid, value, deriv, error_estimate }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kind(&self) -> SolutionKind {
        self.kind
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.value
    }

    pub fn derivatives(&self) -> &[Complex64] {
        &self.deriv
    }

    /// Real parts of the values (the imaginary parts vanish for real kinds).
    pub fn real_values(&self) -> Vec<f64> {
        self.value.iter().map(|z| z.re).collect()
    }

    pub fn real_derivatives(&self) -> Vec<f64> {
        self.deriv.iter().map(|z| z.re).collect()
    }

    /// Step-doubling estimate of the integration error, relative to the
    /// amplitude scale. Zero when the solution was not error-controlled.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    /// CSV with columns `r, re_phi, im_phi, re_dphi, im_dphi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self
            .nodes()
            .iter()
            .zip(self.value.iter().zip(&self.deriv))
            .map(|(&r, (y, d))| vec![r, y.re, y.im, d.re, d.im]);
        write_csv(w, &["r", "re_phi", "im_phi", "re_dphi", "im_dphi"], rows)
    }
}

/// Step control for the amplitude integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Upper bound on the RK4 step.
    pub max_step: f64,
    /// Upper bound on `k·h` and `sqrt(max V)·h` for a step `h`.
    pub max_phase_step: f64,
    /// Bound on the step-doubling error estimate.
    pub tol: f64,
    /// Checked solves halve the step until `tol` is met, down to
    /// `max_step / max_refine`.
    pub max_refine: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_step: 0.01, max_phase_step: 0.1, tol: 1e-6, max_refine: 16 }
    }
}

fn substep_rule<'a>(v: &'a Potential, k: f64, opts: &'a SolverOptions) -> impl Fn(f64, f64) -> usize + 'a {
    move |lo, hi| {
        let mut h = opts.max_step;
        if k > 0.0 {
            h = h.min(opts.max_phase_step / k);
        }
        let vmax = v.local_max(lo, hi);
        if vmax > 0.0 {
            h = h.min(opts.max_phase_step / vmax.sqrt());
        }
        ((hi - lo) / h).ceil().max(1.0) as usize
    }
}

/// `V` on a smooth piece whose lower end is `lo`.
fn v_piece(v: &Potential, r: f64, lo: f64) -> f64 {
    if r <= lo {
        v.value_right(lo)
    } else {
        v.value(r)
    }
}

/// `(sin kr / k, cos kr)`, continuous at `k = 0`.
fn regular_basis(k: f64, r: f64) -> (f64, f64) {
    if k == 0.0 {
        (r, 1.0)
    } else {
        let (s, c) = (k * r).sin_cos();
        (s / k, c)
    }
}

/// Amplitudes of the regular solution on every grid node.
///
/// `φ = (1 + alpha)·sin(kr)/k + b·cos(kr)`. `alpha` is stored instead of
/// `a = 1 + alpha` so that `φ - sin(kr)/k` keeps full relative precision
/// near the origin. `phase` is the running integral
/// `-k ∫_0^r V φ² / (φ'² + k² φ²)`.
#[derive(Debug, Clone)]
pub struct RegularAmplitudes {
    pub k: f64,
    pub alpha: Vec<f64>,
    pub b: Vec<f64>,
    pub phase: Vec<f64>,
    pub error_estimate: f64,
}

impl RegularAmplitudes {
    pub fn a(&self, i: usize) -> f64 {
        1.0 + self.alpha[i]
    }

    /// `δ = atan2(k b, a)` at node `i`, in `(-π, π]`.
    pub fn fitted_phase(&self, i: usize) -> f64 {
        (self.k * self.b[i]).atan2(self.a(i))
    }

    /// `A = sqrt(a² + k² b²)` at node `i`.
    pub fn amplitude(&self, i: usize) -> f64 {
        self.a(i).hypot(self.k * self.b[i])
    }
}

/// Integrates the regular amplitudes. With `checked`, the run is repeated at
/// half the step and the step-doubling estimate must stay below `opts.tol`.
pub fn regular_amplitudes(
    v: &Potential,
    k: f64,
    grid: &RadialGrid,
    opts: &SolverOptions,
    checked: bool,
) -> Result<RegularAmplitudes> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be >= 0, got {k}")));
    }
    let nodes = grid.nodes();
    let n = nodes.len();
    if v.is_zero() {
        return Ok(RegularAmplitudes {
            k,
            alpha: vec![0.0; n],
            b: vec![0.0; n],
            phase: vec![0.0; n],
            error_estimate: 0.0,
        });
    }
    let rhs = |r: f64, lo: f64, y: &[f64; 3]| {
        let vr = v_piece(v, r, lo);
        let (s, c) = regular_basis(k, r);
        let a = 1.0 + y[0];
        let phi = a * s + y[1] * c;
        let dphase = if k > 0.0 {
            let den = a * a + k * k * y[1] * y[1];
            -k * vr * phi * phi / den
        } else {
            0.0
        };
        [c * vr * phi, -s * vr * phi, dphase]
    };
    let sub = substep_rule(v, k, opts);
    let cuts = v.breakpoints();
    let (states, est) = if checked {
        let (s, e) = integrate_to_tolerance(&rhs, nodes, &cuts, &sub, [0.0; 3], opts.tol, opts.max_refine);
        if e > opts.tol || !e.is_finite() {
            return Err(Error::SolverDivergence { k, estimate: e, tol: opts.tol });
        }
        (s, e)
    } else {
        (integrate(&rhs, nodes, &cuts, &sub, 1, [0.0; 3]), 0.0)
    };
    let mut alpha = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for s in &states {
        if !s.iter().all(|x| x.is_finite()) {
            return Err(Error::SolverDivergence { k, estimate: f64::INFINITY, tol: opts.tol });
        }
        alpha.push(s[0]);
        b.push(s[1]);
        phase.push(s[2]);
    }
    Ok(RegularAmplitudes { k, alpha, b, phase, error_estimate: est })
}

fn regular_from_amplitudes(amp: &RegularAmplitudes, grid: &RadialGrid) -> WaveSolution {
    let k = amp.k;
    let mut value = Vec::with_capacity(grid.len());
    let mut deriv = Vec::with_capacity(grid.len());
    for (i, &r) in grid.nodes().iter().enumerate() {
        let (s, c) = regular_basis(k, r);
        let a = amp.a(i);
        let b = amp.b[i];
        value.push(Complex64::new(a * s + b * c, 0.0));
        // d/dr (sin kr / k) = cos kr, d/dr cos kr = -k² (sin kr / k)
        deriv.push(Complex64::new(a * c - k * k * b * s, 0.0));
    }
    WaveSolution::new(k, SolutionKind::Regular, grid.clone(), value, deriv, amp.error_estimate)
}

/// The regular solution `φ(k, r)` with error control at default options.
pub fn regular_solution(v: &Potential, k: f64, grid: &RadialGrid) -> Result<WaveSolution> {
    regular_solution_with(v, k, grid, &SolverOptions::default())
}

pub fn regular_solution_with(
    v: &Potential,
    k: f64,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<WaveSolution> {
    let amp = regular_amplitudes(v, k, grid, opts, true)?;
    Ok(regular_from_amplitudes(&amp, grid))
}

/// Amplitudes of the Jost solution, `f = a e^{ikr} + b e^{-ikr}` (`k > 0`)
/// or `f = a + b r` (`k = 0`), with `a = 1`, `b = 0` at `R_max`.
#[derive(Debug, Clone)]
pub struct JostAmplitudes {
    pub k: f64,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub error_estimate: f64,
}

pub fn jost_amplitudes(
    v: &Potential,
    k: f64,
    grid: &RadialGrid,
    opts: &SolverOptions,
    checked: bool,
) -> Result<JostAmplitudes> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be >= 0, got {k}")));
    }
    let n = grid.len();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if v.is_zero() {
        return Ok(JostAmplitudes { k, a: vec![one; n], b: vec![zero; n], error_estimate: 0.0 });
    }
    let rhs = |r: f64, lo: f64, y: &[Complex64; 2]| {
        let vr = v_piece(v, r, lo);
        if k == 0.0 {
            let f = y[0] + y[1] * r;
            [f * (-r * vr), f * vr]
        } else {
            let e = Complex64::from_polar(1.0, k * r);
            let f = y[0] * e + y[1] * e.conj();
            let g = f * vr / (2.0 * I * k);
            [g * e.conj(), -(g * e)]
        }
    };
    let reversed: Vec<f64> = grid.nodes().iter().rev().copied().collect();
    let sub = substep_rule(v, k, opts);
    let cuts = v.breakpoints();
    let (mut states, est) = if checked {
        let (s, e) = integrate_to_tolerance(&rhs, &reversed, &cuts, &sub, [one, zero], opts.tol, opts.max_refine);
        if e > opts.tol || !e.is_finite() {
            return Err(Error::SolverDivergence { k, estimate: e, tol: opts.tol });
        }
        (s, e)
    } else {
        (integrate(&rhs, &reversed, &cuts, &sub, 1, [one, zero]), 0.0)
    };
    states.reverse();
    if states.iter().any(|s| !(s[0].is_finite() && s[1].is_finite())) {
        return Err(Error::SolverDivergence { k, estimate: f64::INFINITY, tol: opts.tol });
    }
    let a = states.iter().map(|s| s[0]).collect();
    let b = states.iter().map(|s| s[1]).collect();
    Ok(JostAmplitudes { k, a, b, error_estimate: est })
}

fn jost_from_amplitudes(amp: &JostAmplitudes, grid: &RadialGrid) -> WaveSolution {
    let k = amp.k;
    let mut value = Vec::with_capacity(grid.len());
    let mut deriv = Vec::with_capacity(grid.len());
    for (i, &r) in grid.nodes().iter().enumerate() {
        let (a, b) = (amp.a[i], amp.b[i]);
        if k == 0.0 {
            value.push(a + b * r);
            deriv.push(b);
        } else {
            let e = Complex64::from_polar(1.0, k * r);
            value.push(a * e + b * e.conj());
            deriv.push(I * k * (a * e - b * e.conj()));
        }
    }
    WaveSolution::new(k, SolutionKind::Jost, grid.clone(), value, deriv, amp.error_estimate)
}

/// The Jost solution `f(k, r)`, integrated backward from
/// `f(R_max) = e^{ikR_max}`, `f'(R_max) = ik e^{ikR_max}`.
pub fn jost_solution(v: &Potential, k: f64, grid: &RadialGrid) -> Result<WaveSolution> {
    jost_solution_with(v, k, grid, &SolverOptions::default())
}

pub fn jost_solution_with(
    v: &Potential,
    k: f64,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<WaveSolution> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("Jost solution needs k > 0, got {k}")));
    }
    let amp = jost_amplitudes(v, k, grid, opts, true)?;
    Ok(jost_from_amplitudes(&amp, grid))
}

/// `φ ≈ A sin(kr + δ) / k` beyond the range of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub amplitude: f64,
    pub delta: f64,
    pub residual: f64,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Fits `A` and `δ` to `(φ, φ')` on the outer 20% of the nodes. Each node
/// gives `δ_i = atan2(kφ, φ') - kr` and `A_i = sqrt(φ'² + k²φ²)`; the result
/// is their mean and the residual is the largest deviation from it (phase in
/// radians, amplitude relative).
pub fn asymptotic_fit(sol: &WaveSolution, k: f64) -> Result<AsymptoticFit> {
    if sol.kind() != SolutionKind::Regular {
        return Err(Error::InvalidParameter("asymptotic fit needs a regular solution".into()));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("asymptotic fit needs k > 0, got {k}")));
    }
    let r_max = sol.grid().r_max();
    if k * r_max < 2.0 * PI {
        return Err(Error::FitUnstable { kr: k * r_max });
    }
    let nodes = sol.nodes();
    let start = outer_start(nodes.len());
    let mut phases = Vec::new();
    let mut amps = Vec::new();
    for i in start..nodes.len() {
        let y = sol.values()[i].re;
        let d = sol.derivatives()[i].re;
        phases.push(wrap_angle((k * y).atan2(d) - k * nodes[i]));
        amps.push(d.hypot(k * y));
    }
    // unwrap relative to the last node before averaging
    let reference = *phases.last().expect("outer region is non-empty");
    let unwrapped: Vec<f64> = phases.iter().map(|p| reference + wrap_angle(p - reference)).collect();
    let m = unwrapped.len() as f64;
    let mean_phase = unwrapped.iter().sum::<f64>() / m;
    let mean_amp = amps.iter().sum::<f64>() / m;
    let phase_dev = unwrapped.iter().map(|p| (p - mean_phase).abs()).fold(0.0, f64::max);
    let amp_dev = amps.iter().map(|a| (a - mean_amp).abs() / mean_amp).fold(0.0, f64::max);
    Ok(AsymptoticFit {
        amplitude: mean_amp,
        delta: wrap_angle(mean_phase),
        residual: phase_dev.max(amp_dev),
    })
}

fn outer_start(n: usize) -> usize {
    let start = (0.8 * n as f64).floor() as usize;
    start.min(n.saturating_sub(2))
}

/// `φ₀(r) ≈ A₀ r + B₀` at large `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEnergyAsymptotics {
    pub a0: f64,
    pub b0: f64,
    /// Largest deviation of `φ₀` from the fitted line on the fit window.
    pub residual: f64,
}

/// Least-squares line through `φ₀` on the outer 20% of the grid.
pub fn zero_energy_asymptotics(phi0: &WaveSolution) -> Result<ZeroEnergyAsymptotics> {
    if phi0.kind() != SolutionKind::Regular || phi0.k() != 0.0 {
        return Err(Error::InvalidParameter("expected the zero-energy regular solution".into()));
    }
    let nodes = phi0.nodes();
    let start = outer_start(nodes.len());
    let xs = &nodes[start..];
    let ys: Vec<f64> = phi0.values()[start..].iter().map(|z| z.re).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a0 = sxy / sxx;
    let b0 = my - a0 * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (a0 * x + b0)).abs())
        .fold(0.0, f64::max);
    Ok(ZeroEnergyAsymptotics { a0, b0, residual })
}

/// Grid with every interval bisected, used for interval-wise Simpson sums.
fn bisected(grid: &RadialGrid) -> Result<RadialGrid> {
    let nodes = grid.nodes();
    let mut fine = Vec::with_capacity(2 * nodes.len() - 1);
    for w in nodes.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(grid.r_max());
    RadialGrid::from_nodes(fine)
}

/// `φ₀` and `χ₀` together with the consistency data used by diagnostics.
#[derive(Debug, Clone)]
pub struct ZeroEnergyPair {
    pub phi0: WaveSolution,
    pub chi0: WaveSolution,
    pub asymptotics: ZeroEnergyAsymptotics,
    /// `χ₀` propagated by the ODE from infinity (the zero-energy Jost
    /// solution divided by its value at the origin).
    pub chi0_ode: Vec<f64>,
    pub chi0_ode_deriv: Vec<f64>,
    /// Zero-energy Jost solution at the origin; equals `A₀` in exact arithmetic.
    pub jost0_at_origin: f64,
}

/// Zero-energy pair `(φ₀, χ₀)`. `χ₀ = φ₀ ∫_r^∞ dt/φ₀²`, with the part beyond
/// `R_max` taken from the tangent line there, `1/(φ₀'(R_max) φ₀(R_max))`.
pub fn zero_energy_pair(v: &Potential, grid: &RadialGrid) -> Result<(WaveSolution, WaveSolution)> {
    let pair = zero_energy_pair_full(v, grid, &SolverOptions::default())?;
    Ok((pair.phi0, pair.chi0))
}

pub fn zero_energy_pair_full(
    v: &Potential,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<ZeroEnergyPair> {
    let fine = bisected(grid)?;
    let amp = regular_amplitudes(v, 0.0, &fine, opts, true)?;
    let fnodes = fine.nodes();
    let nf = fnodes.len();
    let phi: Vec<f64> = (0..nf).map(|i| amp.a(i) * fnodes[i] + amp.b[i]).collect();
    let dphi: Vec<f64> = (0..nf).map(|i| amp.a(i)).collect();
    for (i, &p) in phi.iter().enumerate().skip(1) {
        if !(p > 0.0) {
            return Err(Error::ZeroEnergyNode(fnodes[i]));
        }
    }
    let coarse = |x: &[f64]| -> Vec<Complex64> { x.iter().step_by(2).map(|&y| Complex64::new(y, 0.0)).collect() };
    let phi0 = WaveSolution::new(0.0, SolutionKind::Regular, grid.clone(), coarse(&phi), coarse(&dphi), amp.error_estimate);
    let asym = zero_energy_asymptotics(&phi0)?;
    if !(asym.a0 > 0.0 && asym.a0 * grid.r_max() + asym.b0 > 0.0) {
        return Err(Error::Corrupted(format!("zero-energy asymptote A0={}, B0={}", asym.a0, asym.b0)));
    }
    // The tangent line at R_max rather than the fitted one: it is the exact
    // continuation with V = 0 beyond R_max, so χ₀'(R_max) = 0.
    let tail = 1.0 / (dphi[nf - 1] * phi[nf - 1]);

    // g = 1/φ₀² - 1/t², computed as (t - φ₀)(t + φ₀)/(φ₀² t²) with
    // t - φ₀ = -(alpha t + b) to avoid cancellation near the origin.
    let g: Vec<f64> = (0..nf)
        .map(|i| {
            let t = fnodes[i];
            if t == 0.0 {
                -v.value_right(0.0) / 3.0
            } else {
                let diff = -(amp.alpha[i] * t + amp.b[i]);
                diff * (t + phi[i]) / (phi[i] * phi[i] * t * t)
            }
        })
        .collect();
    // ∫_{r_i}^{R} g by Simpson on each coarse interval (midpoint from the fine grid).
    let n = grid.len();
    let mut tail_g = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let (lo, hi) = (fnodes[2 * i], fnodes[2 * i + 2]);
        tail_g[i] = tail_g[i + 1] + (hi - lo) / 6.0 * (g[2 * i] + 4.0 * g[2 * i + 1] + g[2 * i + 2]);
    }
    let mut chi = Vec::with_capacity(n);
    let mut dchi = Vec::with_capacity(n);
    for i in 0..n {
        let r = grid.nodes()[i];
        let (p, dp) = (phi[2 * i], dphi[2 * i]);
        let c = tail_g[i] - 1.0 / grid.r_max() + tail;
        if r == 0.0 {
            chi.push(1.0);
            dchi.push(c);
        } else {
            let psi = 1.0 / r + c;
            chi.push(p * psi);
            dchi.push(dp * psi - 1.0 / p);
        }
    }

    let jost = jost_amplitudes(v, 0.0, grid, opts, true)?;
    let f0: Vec<f64> = grid.nodes().iter().enumerate().map(|(i, &r)| (jost.a[i] + jost.b[i] * r).re).collect();
    let df0: Vec<f64> = jost.b.iter().map(|b| b.re).collect();
    let origin = f0[0];
    let chi0_ode = f0.iter().map(|f| f / origin).collect();
    let chi0_ode_deriv = df0.iter().map(|f| f / origin).collect();

    let to_c = |x: Vec<f64>| x.into_iter().map(|y| Complex64::new(y, 0.0)).collect();
    let chi0 = WaveSolution::new(
        0.0,
        SolutionKind::ZeroEnergyIrregular,
        grid.clone(),
        to_c(chi),
        to_c(dchi),
        amp.error_estimate.max(jost.error_estimate),
    );
    Ok(ZeroEnergyPair { phi0, chi0, asymptotics: asym, chi0_ode, chi0_ode_deriv, jost0_at_origin: origin })
}

/// Consistency measures of a zero-energy pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WronskianReport {
    /// `max |W(φ₀, χ₀) - 1|` with `χ₀` from the integral formula.
    pub drift_integral: f64,
    /// `max |W_i - W_0| / |W_0|` for `χ₀` propagated by the ODE.
    pub drift_ode: f64,
    /// `max |χ₀ - χ₀_ode|` between the two constructions.
    pub chi0_gap: f64,
    /// `|f₀(0) - A₀| / A₀`.
    pub a0_mismatch: f64,
}

impl WronskianReport {
    pub fn max_drift(&self) -> f64 {
        self.drift_integral.max(self.drift_ode)
    }
}

pub fn wronskian_report(pair: &ZeroEnergyPair) -> WronskianReport {
    let p = pair.phi0.real_values();
    let dp = pair.phi0.real_derivatives();
    let c = pair.chi0.real_values();
    let dc = pair.chi0.real_derivatives();
    let drift_integral = (0..p.len())
        .map(|i| (dp[i] * c[i] - p[i] * dc[i] - 1.0).abs())
        .fold(0.0, f64::max);
    let w: Vec<f64> = (0..p.len())
        .map(|i| dp[i] * pair.chi0_ode[i] - p[i] * pair.chi0_ode_deriv[i])
        .collect();
    let drift_ode = w.iter().map(|x| (x - w[0]).abs() / w[0].abs()).fold(0.0, f64::max);
    let chi0_gap = c.iter().zip(&pair.chi0_ode).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let a0 = pair.asymptotics.a0;
    WronskianReport {
        drift_integral,
        drift_ode,
        chi0_gap,
        a0_mismatch: (pair.jost0_at_origin - a0).abs() / a0,
    }
}
