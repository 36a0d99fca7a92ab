//! Sine and generalized transforms, the positive-kernel construction of
//! `f` from `g`, Stieltjes transforms with the Jost solution, and the
//! Volterra pair that pushes a measure through the kernel `A` and back.
//!
//! Oscillatory integrals are evaluated on the amplitude form of the
//! solution: with `φ = a sin(kr)/k + b cos(kr)` (or `f = a e^{ikr} + b
//! e^{-ikr}`) the amplitudes are smooth, so Filon weights for `e^{±ikr}`
//! apply to `f·a`, `f·b` directly and the accuracy is uniform in `k`.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{KGrid, RadialGrid};
use crate::io::{num, write_csv};
use crate::marchenko::TriangularKernel;
use crate::potential::{choose_truncation, Potential};
use crate::quadrature::{
    cumulative_cubic_from_end, filon, filon_complex, gauss_legendre_composite, simpson, trapezoid,
};
use crate::schrodinger::{
    jost_amplitudes, regular_amplitudes, zero_energy_asymptotics, SolutionKind, SolverOptions,
    WaveSolution,
};

/// A real function sampled on the nodes of a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite sample at r = {}",
                grid.nodes()[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &RadialGrid, f: F) -> Result<Self> {
        Self::new(grid.clone(), grid.nodes().iter().map(|&r| f(r)).collect())
    }

    pub fn zero(grid: &RadialGrid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation; zero outside `[0, R_max]`.
    pub fn interpolate(&self, r: f64) -> f64 {
        let x = self.nodes();
        if r < 0.0 || r > self.grid.r_max() {
            return 0.0;
        }
        let j = x.partition_point(|&t| t <= r);
        if j == 0 {
            return self.values[0];
        }
        if j >= x.len() {
            return self.values[x.len() - 1];
        }
        let (x0, x1) = (x[j - 1], x[j]);
        let w = (r - x0) / (x1 - x0);
        self.values[j - 1] * (1.0 - w) + self.values[j] * w
    }

    /// `∫_0^{R_max}` by composite Simpson.
    pub fn integral(&self) -> f64 {
        simpson(self.nodes(), &self.values)
    }
}

/// Transform values on a k-grid with a per-node error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult {
    pub kgrid: KGrid,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
}

impl TransformResult {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// CSV with columns `k, re, im, err`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self
            .kgrid
            .nodes()
            .iter()
            .zip(self.values.iter().zip(&self.errors))
            .map(|(&k, (v, e))| vec![k, v.re, v.im, *e]);
        write_csv(w, &["k", "re", "im", "err"], rows)
    }
}

/// Indices of every other node, always keeping both ends.
fn coarse_indices(n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).step_by(2).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    idx
}

fn pick<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i]).collect()
}

/// One-sided derivative at the last node.
fn end_slope(x: &[f64], f: &[f64]) -> f64 {
    let n = x.len();
    (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2])
}

/// `∫_R^∞ f(r) e^{ikr} dr` for a slowly varying `f` from two integrations by
/// parts: `-e^{ikR} (f(R)/(ik) - f'(R)/(ik)²)`.
fn abel_tail(r: f64, f: f64, df: f64, k: f64) -> Complex64 {
    let ik = Complex64::new(0.0, k);
    -Complex64::from_polar(1.0, k * r) * (f / ik - df / (ik * ik))
}

/// `∫_0^∞ f(r) sin kr dr`: Filon on the samples plus the integration-by-parts
/// tail beyond `R_max`. The error estimate combines the change under halving
/// the resolution with the size of the first neglected tail term.
pub fn sine_transform(f: &SampledFunction, kgrid: &KGrid) -> TransformResult {
    let x = f.nodes();
    let v = f.values();
    let idx = coarse_indices(x.len());
    let (xc, vc) = (pick(x, &idx), pick(v, &idx));
    let rm = f.grid().r_max();
    let (fr, dfr) = (v[v.len() - 1], end_slope(x, v));
    let mut values = Vec::with_capacity(kgrid.len());
    let mut errors = Vec::with_capacity(kgrid.len());
    for &k in kgrid.nodes() {
        if k == 0.0 {
            values.push(Complex64::new(0.0, 0.0));
            errors.push(0.0);
            continue;
        }
        let fine = filon(x, v, k).im;
        let coarse = filon(&xc, &vc, k).im;
        let tail = abel_tail(rm, fr, dfr, k).im;
        values.push(Complex64::new(fine + tail, 0.0));
        errors.push((fine - coarse).abs() / 7.0 + dfr.abs() / (k * k * k).max(1e-300) * k.min(1.0));
    }
    TransformResult { kgrid: kgrid.clone(), values, errors }
}

/// Endpoint conditions for positivity of the sine transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TitchmarshReport {
    pub non_increasing: bool,
    pub integrable_at_0: bool,
    pub vanishes: bool,
    /// Power `p` in `f ~ r^{-p}` fitted at the first two positive nodes.
    pub origin_exponent: f64,
}

impl TitchmarshReport {
    pub fn pass(&self) -> bool {
        self.non_increasing && self.integrable_at_0 && self.vanishes
    }
}

/// Checks the conditions on sampled data: first differences `<= 1e-12·max|f|`;
/// `|f| ~ r^{-p}` near the origin with `p < 1` (the value at `r = 0` is
/// ignored, so a singular function may carry any finite placeholder there);
/// and `|f|` either negligible at `R_max` or decaying like a power over the
/// outer 20% of the grid.
pub fn titchmarsh_check(f: &SampledFunction) -> TitchmarshReport {
    let x = f.nodes();
    let v = f.values();
    let scale = v[1..].iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let non_increasing = v[1..].windows(2).all(|w| w[1] - w[0] <= tol);
    let (a, b) = (v[1].abs(), v[2].abs());
    let origin_exponent = if a > 0.0 && b > 0.0 { (a / b).ln() / (x[2] / x[1]).ln() } else { 0.0 };
    let integrable_at_0 = origin_exponent < 1.0;
    let n = x.len();
    let last = v[n - 1].abs();
    let start = ((0.8 * n as f64) as usize).min(n - 2);
    let outer = &v[start..];
    let vanishes = last <= 1e-8 * scale
        || (outer.windows(2).all(|w| w[1].abs() < w[0].abs())
            && (outer[0].abs() / last).ln() / (x[n - 1] / x[start]).ln() > 0.5);
    TitchmarshReport { non_increasing, integrable_at_0, vanishes, origin_exponent }
}

/// `f̃(k) = ∫_0^∞ f(r) φ(k, r) dr` with the regular solution of `V`.
///
/// Normalisation follows `φ(0) = 0, φ'(0) = 1`, so for `V ≡ 0` the result
/// is the sine transform divided by `k`.
pub fn generalized_transform(f: &SampledFunction, v: &Potential, kgrid: &KGrid) -> Result<TransformResult> {
    let x = f.nodes();
    let fv = f.values();
    let idx = coarse_indices(x.len());
    let xc = pick(x, &idx);
    let opts = SolverOptions::default();
    let rm = f.grid().r_max();
    let (fr, dfr) = (fv[fv.len() - 1], end_slope(x, fv));
    let mut values = Vec::with_capacity(kgrid.len());
    let mut errors = Vec::with_capacity(kgrid.len());
    for &k in kgrid.nodes() {
        let amp = regular_amplitudes(v, k, f.grid(), &opts, false)?;
        let n = x.len();
        let (total, coarse, tail_term) = if k == 0.0 {
            let g: Vec<f64> = (0..n).map(|i| fv[i] * (amp.a(i) * x[i] + amp.b[i])).collect();
            (simpson(x, &g), simpson(&xc, &pick(&g, &idx)), 0.0)
        } else {
            // φ = Im[(a/k) e^{ikr}] + Re[b e^{ikr}]
            let fa: Vec<f64> = (0..n).map(|i| fv[i] * amp.a(i) / k).collect();
            let fb: Vec<f64> = (0..n).map(|i| fv[i] * amp.b[i]).collect();
            let whole = |xs: &[f64], a: &[f64], b: &[f64]| filon(xs, a, k).im + filon(xs, b, k).re;
            let total = whole(x, &fa, &fb);
            let coarse = whole(&xc, &pick(&fa, &idx), &pick(&fb, &idx));
            let (a_end, b_end) = (amp.a(n - 1), amp.b[n - 1]);
            let t = abel_tail(rm, fr, dfr, k);
            let tail = a_end / k * t.im + b_end * t.re;
            (total + tail, coarse + tail, tail)
        };
        values.push(Complex64::new(total, 0.0));
        errors.push((total - coarse).abs() / 7.0 + 0.1 * tail_term.abs());
    }
    Ok(TransformResult { kgrid: kgrid.clone(), values, errors })
}

/// `f(r) = ∫_r^∞ [χ₀(r) φ₀(t) - φ₀(r) χ₀(t)] g(t) dt`, i.e.
/// `f = χ₀ P - φ₀ Q` with `P = ∫_r^∞ φ₀ g`, `Q = ∫_r^∞ χ₀ g`.
///
/// Integrals on the grid use local cubics. Beyond `R_max`, `φ₀ = A₀t + B₀`,
/// `χ₀ = 1/A₀`, and `g` continues as the power law through its last two
/// samples; a fitted decay no faster than `t^{-2}` makes `∫ t g` diverge.
pub fn build_f_from_g(g: &SampledFunction, phi0: &WaveSolution, chi0: &WaveSolution) -> Result<SampledFunction> {
    if phi0.kind() != SolutionKind::Regular || chi0.kind() != SolutionKind::ZeroEnergyIrregular {
        return Err(Error::InvalidParameter("expected the zero-energy pair (phi0, chi0)".into()));
    }
    if phi0.grid() != g.grid() || chi0.grid() != g.grid() {
        return Err(Error::InvalidGrid("g, phi0 and chi0 must share one grid".into()));
    }
    if let Some(i) = g.values().iter().position(|&y| y < 0.0) {
        return Err(Error::InvalidParameter(format!("g is negative at r = {}", g.nodes()[i])));
    }
    let x = g.nodes();
    let gv = g.values();
    let p0 = phi0.real_values();
    let c0 = chi0.real_values();
    let n = x.len();
    let asym = zero_energy_asymptotics(phi0)?;
    let (p_tail, q_tail) = g_tails(x, gv, asym.a0, asym.b0)?;
    let pg: Vec<f64> = (0..n).map(|i| p0[i] * gv[i]).collect();
    let cg: Vec<f64> = (0..n).map(|i| c0[i] * gv[i]).collect();
    let p = cumulative_cubic_from_end(x, &pg);
    let q = cumulative_cubic_from_end(x, &cg);
    let values = (0..n)
        .map(|i| c0[i] * (p[i] + p_tail) - p0[i] * (q[i] + q_tail))
        .collect();
    SampledFunction::new(g.grid().clone(), values)
}

/// `(∫_R^∞ (A₀t + B₀) g, ∫_R^∞ g / A₀)` for `g ~ c t^{-q}` beyond `R`.
fn g_tails(x: &[f64], g: &[f64], a0: f64, b0: f64) -> Result<(f64, f64)> {
    let n = x.len();
    let (r1, r2) = (x[n - 2], x[n - 1]);
    let (g1, g2) = (g[n - 2], g[n - 1]);
    if g2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let q = if g1 > g2 { (g1 / g2).ln() / (r2 / r1).ln() } else { 0.0 };
    if q <= 2.0 {
        return Err(Error::DivergentTail { what: format!("t·g(t) (fitted decay t^-{q:.3})") });
    }
    let c = g2 * r2.powf(q);
    let int_t = c * r2.powf(2.0 - q) / (q - 2.0);
    let int_1 = c * r2.powf(1.0 - q) / (q - 1.0);
    Ok((a0 * int_t + b0 * int_1, int_1 / a0))
}

/// Second-difference residual of `f'' = V f + g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub nodes_checked: usize,
}

/// Max over interior nodes of `|Δ²f - V f - g|`. Nodes at jumps of `V` are
/// skipped, since `f''` is discontinuous there.
pub fn ode_residual_check(f: &SampledFunction, v: &Potential, g: &SampledFunction) -> Result<ResidualReport> {
    let profile = ode_residual_profile(f, v, g)?;
    let max_residual = profile.iter().map(|&(_, r)| r.abs()).fold(0.0, f64::max);
    Ok(ResidualReport { max_residual, nodes_checked: profile.len() })
}

/// `(node index, f'' - V f - g)` on interior nodes with a central second
/// difference; nodes on a breakpoint of `V` are left out.
pub fn ode_residual_profile(f: &SampledFunction, v: &Potential, g: &SampledFunction) -> Result<Vec<(usize, f64)>> {
    if f.grid() != g.grid() {
        return Err(Error::InvalidGrid("f and g must share one grid".into()));
    }
    let x = f.nodes();
    let fv = f.values();
    let gv = g.values();
    let breaks = v.breakpoints();
    let mut out = Vec::with_capacity(x.len());
    for i in 1..x.len() - 1 {
        if breaks.iter().any(|&b| (b - x[i]).abs() <= 1e-12 * b.max(1.0)) {
            continue;
        }
        let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let d2 = 2.0 * ((fv[i + 1] - fv[i]) / h2 - (fv[i] - fv[i - 1]) / h1) / (h1 + h2);
        out.push((i, d2 - v.value(x[i]) * fv[i] - gv[i]));
    }
    Ok(out)
}

/// Outcome of a numerical divergence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Whether `h₁(r) = ∫_r^1 t g` lies in `Lᵖ(0,1)` and `h₂(r) = ∫_r^∞ t g`
/// in `Lᵖ(1,∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub h1_in_lp_01: Verdict,
    pub h2_in_lp_1inf: Verdict,
    /// Ratios of successive dyadic contributions near 0 and near infinity.
    pub ratio_origin: f64,
    pub ratio_infinity: f64,
}

const LP_LEVELS: usize = 30;

/// Classifies a series of positive contributions from dyadic shells: ratios
/// settling below 0.9 indicate convergence, ratios of at least 0.98
/// divergence, anything in between is left open.
fn classify(parts: &[f64]) -> (Verdict, f64) {
    let total: f64 = parts.iter().sum();
    if total == 0.0 {
        return (Verdict::Pass, 0.0);
    }
    let tail = &parts[parts.len() - 4..];
    if tail.iter().all(|&p| p <= 1e-300 + 1e-15 * total) {
        return (Verdict::Pass, 0.0);
    }
    let ratio = tail.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::INFINITY }).fold(0.0, f64::max);
    let verdict = if ratio < 0.9 {
        Verdict::Pass
    } else if ratio >= 0.98 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    (verdict, ratio)
}

/// [`LpReport`] for `g` given as a function on `(0, ∞)`.
pub fn lp_membership<G: Fn(f64) -> f64>(g: G, p: f64) -> Result<LpReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let tg = |t: f64| t * g(t);
    // Near 0: shells [2^{-m-1}, 2^{-m}], h₁ accumulated shell by shell.
    let mut parts0 = Vec::with_capacity(LP_LEVELS);
    let mut h_hi = 0.0; // h₁ at the shell's upper end
    for m in 0..LP_LEVELS {
        let (lo, hi) = (0.5f64.powi(m as i32 + 1), 0.5f64.powi(m as i32));
        let h1 = |r: f64| h_hi + gauss_legendre_composite(tg, r, hi, 4, &[]);
        parts0.push(gauss_legendre_composite(|r| h1(r).abs().powf(p), lo, hi, 4, &[]));
        h_hi += gauss_legendre_composite(tg, lo, hi, 8, &[]);
    }
    // Near ∞: h₂ on shells [2^m, 2^{m+1}], computed from the far end inward.
    let mut shell_mass = Vec::with_capacity(LP_LEVELS + 8);
    for m in 0..LP_LEVELS + 8 {
        shell_mass.push(gauss_legendre_composite(tg, 2f64.powi(m as i32), 2f64.powi(m as i32 + 1), 8, &[]));
    }
    let mut beyond = vec![0.0; LP_LEVELS + 9];
    for m in (0..LP_LEVELS + 8).rev() {
        beyond[m] = beyond[m + 1] + shell_mass[m];
    }
    let mut parts_inf = Vec::with_capacity(LP_LEVELS);
    for m in 0..LP_LEVELS {
        let (lo, hi) = (2f64.powi(m as i32), 2f64.powi(m as i32 + 1));
        let h2 = |r: f64| beyond[m + 1] + gauss_legendre_composite(tg, r, hi, 4, &[]);
        parts_inf.push(gauss_legendre_composite(|r| h2(r).abs().powf(p), lo, hi, 4, &[]));
    }
    let (h1v, r0) = classify(&parts0);
    let (h2v, ri) = classify(&parts_inf);
    Ok(LpReport { h1_in_lp_01: h1v, h2_in_lp_1inf: h2v, ratio_origin: r0, ratio_infinity: ri })
}

/// [`lp_membership`] for sampled `g`: linear interpolation inside the grid,
/// power-law continuation beyond it and towards the origin.
pub fn lp_membership_check(g: &SampledFunction, p: f64) -> Result<LpReport> {
    let x = g.nodes().to_vec();
    let v = g.values().to_vec();
    let n = x.len();
    let decay = |a: f64, b: f64, xa: f64, xb: f64| -> f64 {
        if a > 0.0 && b > 0.0 {
            (a / b).ln() / (xb / xa).ln()
        } else {
            f64::INFINITY
        }
    };
    let q_far = decay(v[n - 2], v[n - 1], x[n - 2], x[n - 1]);
    let q_near = decay(v[1], v[2], x[1], x[2]);
    let (x1, v1, xn, vn) = (x[1], v[1], x[n - 1], v[n - 1]);
    let interp = move |t: f64| -> f64 {
        if t < x1 {
            if q_near.is_finite() { v1 * (x1 / t).powf(q_near) } else { v1 }
        } else if t > xn {
            if vn == 0.0 || !q_far.is_finite() { 0.0 } else { vn * (xn / t).powf(q_far) }
        } else {
            let j = x.partition_point(|&s| s <= t).min(n - 1).max(1);
            let w = (t - x[j - 1]) / (x[j] - x[j - 1]);
            v[j - 1] * (1.0 - w) + v[j] * w
        }
    };
    lp_membership(interp, p)
}

/// A bounded measure on `[0, ∞)`: point masses plus a density.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesMeasure {
    atoms: Vec<(f64, f64)>,
    density: SampledFunction,
    signed: bool,
}

impl StieltjesMeasure {
    /// Non-negative measure; atoms are sorted by location.
    pub fn new(mut atoms: Vec<(f64, f64)>, density: SampledFunction) -> Result<Self> {
        for &(t, w) in &atoms {
            if !(t >= 0.0 && t.is_finite() && w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("invalid atom ({t}, {w})")));
            }
        }
        if let Some(i) = density.values().iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "negative density at r = {}",
                density.nodes()[i]
            )));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self { atoms, density, signed: false })
    }

    /// Measure whose density (and atom weights) may be negative.
    pub fn new_signed(mut atoms: Vec<(f64, f64)>, density: SampledFunction) -> Result<Self> {
        for &(t, w) in &atoms {
            if !(t >= 0.0 && t.is_finite() && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("invalid atom ({t}, {w})")));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self { atoms, density, signed: true })
    }

    pub fn density_only(density: SampledFunction) -> Result<Self> {
        Self::new(Vec::new(), density)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> &SampledFunction {
        &self.density
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>() + self.density.integral()
    }

    /// `atom <t> <w>` lines, then `density` and one `<r> <value>` line per
    /// node. A leading `signed` line marks a signed measure.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if self.signed {
            s.push_str("signed\n");
        }
        for &(t, w) in &self.atoms {
            let _ = writeln!(s, "atom {} {}", num(t), num(w));
        }
        s.push_str("density\n");
        for (r, v) in self.density.nodes().iter().zip(self.density.values()) {
            let _ = writeln!(s, "{} {}", num(*r), num(*v));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut signed = false;
        let mut in_density = false;
        let (mut r, mut v) = (Vec::new(), Vec::new());
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{e}: {s:?}")));
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (in_density, fields.as_slice()) {
                (false, ["signed"]) => signed = true,
                (false, ["atom", t, w]) => atoms.push((parse(t)?, parse(w)?)),
                (false, ["density"]) => in_density = true,
                (true, [a, b]) => {
                    r.push(parse(a)?);
                    v.push(parse(b)?);
                }
                _ => return Err(Error::Parse(format!("line {}: unexpected {line:?}", n + 1))),
            }
        }
        if !in_density {
            return Err(Error::Parse("missing density block".into()));
        }
        let grid = RadialGrid::from_nodes(r).map_err(|e| Error::Parse(e.to_string()))?;
        let density = SampledFunction::new(grid, v)?;
        if signed {
            Self::new_signed(atoms, density)
        } else {
            Self::new(atoms, density)
        }
    }
}

/// Jost amplitudes on the density nodes plus every atom location, on a grid
/// long enough for `V` to be negligible at its end.
struct JostSampler {
    nodes: Vec<f64>,
    density_idx: Vec<usize>,
    atom_idx: Vec<usize>,
    grid: RadialGrid,
}

impl JostSampler {
    fn new(alpha: &StieltjesMeasure, v: &Potential) -> Result<Self> {
        let dn = alpha.density.nodes();
        let mut nodes: Vec<f64> = dn.to_vec();
        nodes.extend(alpha.atoms.iter().map(|a| a.0));
        let reach = if v.is_zero() { 0.0 } else { choose_truncation(v, 1e-14).unwrap_or(0.0) };
        let mut end = nodes.iter().copied().fold(0.0, f64::max);
        while end < reach {
            end += 1.0;
            nodes.push(end);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup();
        let find = |t: f64| nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()).expect("node present");
        let density_idx = dn.iter().map(|&r| find(r)).collect();
        let atom_idx = alpha.atoms.iter().map(|a| find(a.0)).collect();
        let grid = RadialGrid::from_nodes(nodes.clone())?;
        Ok(Self { nodes, density_idx, atom_idx, grid })
    }

    /// `(∫ f dα, error estimate)` at one `k >= 0`.
    fn transform(&self, alpha: &StieltjesMeasure, v: &Potential, k: f64) -> Result<(Complex64, f64)> {
        let amp = jost_amplitudes(v, k, &self.grid, &SolverOptions::default(), false)?;
        let f_at = |i: usize| -> Complex64 {
            let r = self.nodes[i];
            if k == 0.0 {
                amp.a[i] + amp.b[i] * r
            } else {
                let e = Complex64::from_polar(1.0, k * r);
                amp.a[i] * e + amp.b[i] * e.conj()
            }
        };
        let mut total = Complex64::new(0.0, 0.0);
        for (&(_, w), &i) in alpha.atoms.iter().zip(&self.atom_idx) {
            total += f_at(i) * w;
        }
        let x = alpha.density.nodes();
        let rho = alpha.density.values();
        let idx = coarse_indices(x.len());
        let xc = pick(x, &idx);
        let integral = |xs: &[f64], sel: &dyn Fn(usize) -> usize| -> Complex64 {
            let m = xs.len();
            if k == 0.0 {
                let re: Vec<f64> = (0..m).map(|j| rho[sel(j)] * f_at(self.density_idx[sel(j)]).re).collect();
                Complex64::new(simpson(xs, &re), 0.0)
            } else {
                let pa: Vec<Complex64> = (0..m).map(|j| amp.a[self.density_idx[sel(j)]] * rho[sel(j)]).collect();
                let pb: Vec<Complex64> = (0..m).map(|j| amp.b[self.density_idx[sel(j)]] * rho[sel(j)]).collect();
                filon_complex(xs, &pa, k) + filon_complex(xs, &pb, -k)
            }
        };
        let fine = integral(x, &|j| j);
        let coarse = integral(&xc, &|j| idx[j]);
        total += fine;
        Ok((total, (fine - coarse).norm() / 7.0))
    }
}

/// `f̃(k) = ∫ f(k, r) dα(r)` with the Jost solution of `V`.
pub fn stieltjes_transform(alpha: &StieltjesMeasure, v: &Potential, kgrid: &KGrid) -> Result<TransformResult> {
    let sampler = JostSampler::new(alpha, v)?;
    let mut values = Vec::with_capacity(kgrid.len());
    let mut errors = Vec::with_capacity(kgrid.len());
    for &k in kgrid.nodes() {
        let (z, e) = sampler.transform(alpha, v, k)?;
        values.push(z);
        errors.push(e);
    }
    Ok(TransformResult { kgrid: kgrid.clone(), values, errors })
}

/// Evaluates `f̃` at arbitrary real `k`, extended to `k < 0` by
/// `f̃(-k) = conj f̃(k)`.
pub struct StieltjesEvaluator<'a> {
    alpha: &'a StieltjesMeasure,
    v: &'a Potential,
    sampler: JostSampler,
}

impl<'a> StieltjesEvaluator<'a> {
    pub fn new(alpha: &'a StieltjesMeasure, v: &'a Potential) -> Result<Self> {
        Ok(Self { alpha, v, sampler: JostSampler::new(alpha, v)? })
    }

    pub fn eval(&self, k: f64) -> Result<Complex64> {
        let (z, _) = self.sampler.transform(self.alpha, self.v, k.abs())?;
        Ok(if k < 0.0 { z.conj() } else { z })
    }
}

/// `A(r_j, r_i)` for `j <= i` on the uniform extension of the kernel grid;
/// rows beyond `R_max` use the Born continuation of the kernel.
fn kernel_entry(a: &TriangularKernel, h: f64, j: usize, i: usize) -> f64 {
    let n = a.intervals();
    if i <= n {
        a.at(j, i)
    } else {
        a.value(j as f64 * h, i as f64 * h)
    }
}

fn kernel_step(a: &TriangularKernel) -> f64 {
    a.grid().r_max() / a.intervals() as f64
}

/// Samples `s` on the uniform grid `0, h, ..., m h`.
fn resample(s: &SampledFunction, h: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|i| s.interpolate(i as f64 * h)).collect()
}

/// Weight of node `j` in a rule over `m` equal steps, exact for cubics:
/// Simpson-type rules for `m < 5`, Gregory end corrections beyond.
fn rule_weight(m: usize, j: usize) -> f64 {
    const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    match m {
        0 => 0.0,
        1 => 0.5,
        2 => [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0][j],
        3 => [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0][j],
        4 => [1.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0][j],
        _ => {
            let e = j.min(m - j);
            if e < 3 { GREGORY[e] } else { 1.0 }
        }
    }
}

/// `h Σ_{j<i} w_j A(r_j, r_i) α_j`: the quadrature of `∫_0^{r_i} A α`
/// without its diagonal term.
fn lower_sum(a: &TriangularKernel, h: f64, alpha: &[f64], i: usize) -> f64 {
    let s: f64 = (0..i).map(|j| rule_weight(i, j) * kernel_entry(a, h, j, i) * alpha[j]).sum();
    h * s
}

/// `β_i = α_i + ∫_0^{r_i} A(t, r_i) α(t) dt` on the uniform grid of step `h`.
fn volterra_apply(a: &TriangularKernel, h: f64, alpha: &[f64]) -> Vec<f64> {
    (0..alpha.len())
        .map(|i| alpha[i] + lower_sum(a, h, alpha, i) + h * rule_weight(i, i) * kernel_entry(a, h, i, i) * alpha[i])
        .collect()
}

/// `dβ = dα + (∫_0^r A(t, r) dα(t)) dr`.
///
/// The new density lives on the kernel's uniform step, extended to
/// `2 R_max` because `A(t, r)` does not vanish for `r > R_max`; there the
/// Born continuation of the kernel is used. Atoms are carried over and
/// contribute `w A(t_atom, r)` for `r >= t_atom`.
pub fn push_measure(alpha: &StieltjesMeasure, a: &TriangularKernel) -> Result<StieltjesMeasure> {
    let h = kernel_step(a);
    let m = 2 * a.intervals();
    let rho = resample(&alpha.density, h, m);
    let mut beta = volterra_apply(a, h, &rho);
    for &(t, w) in &alpha.atoms {
        for (i, b) in beta.iter_mut().enumerate() {
            let r = i as f64 * h;
            if r >= t {
                *b += w * a.value(t, r);
            }
        }
    }
    let grid = RadialGrid::uniform(m as f64 * h, m)?;
    let density = SampledFunction::new(grid, beta)?;
    if alpha.signed {
        StieltjesMeasure::new_signed(alpha.atoms.clone(), density)
    } else {
        StieltjesMeasure::new(alpha.atoms.clone(), density)
    }
}

/// Solves `α'(r) = β'(r) - ∫_0^r A(t, r) α'(t) dt` by forward substitution
/// with the same quadrature rule as [`push_measure`], so the two are exact
/// inverses on the grid. `β'` is resampled to the kernel step if needed.
pub fn invert_volterra(beta_density: &SampledFunction, a: &TriangularKernel) -> Result<SampledFunction> {
    let h = kernel_step(a);
    let m = (beta_density.grid().r_max() / h).round() as usize;
    let beta = resample(beta_density, h, m);
    let mut alpha = vec![0.0; m + 1];
    for i in 0..=m {
        let diag = 1.0 + h * rule_weight(i, i) * kernel_entry(a, h, i, i);
        alpha[i] = (beta[i] - lower_sum(a, h, &alpha, i)) / diag;
    }
    let grid = RadialGrid::uniform(m as f64 * h, m)?;
    SampledFunction::new(grid, alpha)
}

/// Picard iteration for the same discrete equation as [`invert_volterra`];
/// an independent route to its solution.
pub fn invert_volterra_picard(beta_density: &SampledFunction, a: &TriangularKernel, sweeps: usize) -> Result<SampledFunction> {
    let h = kernel_step(a);
    let m = (beta_density.grid().r_max() / h).round() as usize;
    let beta = resample(beta_density, h, m);
    let mut alpha = beta.clone();
    for _ in 0..sweeps {
        let pushed = volterra_apply(a, h, &alpha);
        alpha = (0..=m).map(|i| beta[i] - (pushed[i] - alpha[i])).collect();
    }
    let grid = RadialGrid::uniform(m as f64 * h, m)?;
    SampledFunction::new(grid, alpha)
}

/// `|α'(r)| <= β'(r) e^{M β(r)}` with `M = max A` and `β(r) = ∫_0^r β'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub max_excess: f64,
    pub pass: bool,
}

pub fn volterra_envelope_check(alpha: &SampledFunction, beta: &SampledFunction, a: &TriangularKernel) -> Result<EnvelopeReport> {
    if alpha.grid() != beta.grid() {
        return Err(Error::InvalidGrid("alpha and beta densities must share one grid".into()));
    }
    let m = a.max_value();
    let x = beta.nodes();
    let b = beta.values();
    let mut mass = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..x.len() {
        if i > 0 {
            mass += 0.5 * (x[i] - x[i - 1]) * (b[i] + b[i - 1]);
        }
        let env = b[i] * (m * mass).exp();
        max_excess = max_excess.max(alpha.values()[i].abs() - env);
    }
    Ok(EnvelopeReport { max_excess, pass: max_excess <= 1e-8 })
}

/// Trapezoid mass of a density, exposed for diagnostics.
pub fn density_mass(s: &SampledFunction) -> f64 {
    trapezoid(s.nodes(), s.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marchenko::solve_kernel;
    use crate::schrodinger::zero_energy_pair;

    fn grid(r: f64, n: usize) -> RadialGrid {
        RadialGrid::uniform(r, n).unwrap()
    }

    fn kgrid(a: f64, b: f64, m: usize) -> KGrid {
        KGrid::uniform(a, b, m).unwrap()
    }

    #[test]
    fn sine_transform_of_exponential() {
        let f = SampledFunction::from_fn(&grid(40.0, 4000), |r| (-r).exp()).unwrap();
        let res = sine_transform(&f, &kgrid(0.5, 20.0, 39));
        for (k, v) in res.kgrid.nodes().iter().zip(&res.values) {
            assert!((v.re - k / (1.0 + k * k)).abs() < 1e-9, "k={k}");
        }
        let z = sine_transform(&SampledFunction::zero(&grid(1.0, 10)), &kgrid(0.0, 1.0, 4));
        assert!(z.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn sine_transform_with_slow_tail_is_positive() {
        let f = SampledFunction::from_fn(&grid(60.0, 6000), |r| 1.0 / (r + 1.0)).unwrap();
        assert!(titchmarsh_check(&f).pass());
        let res = sine_transform(&f, &kgrid(0.1, 20.0, 199));
        assert!(res.values.iter().all(|v| v.re > 0.0));
    }

    #[test]
    fn titchmarsh_examples() {
        let g = grid(30.0, 3000);
        assert!(titchmarsh_check(&SampledFunction::from_fn(&g, |r| (-r).exp()).unwrap()).pass());
        assert!(!titchmarsh_check(&SampledFunction::from_fn(&g, f64::sin).unwrap()).non_increasing);
        // r^{-1/2} e^{-r}; the r = 0 sample is a finite placeholder.
        let s = SampledFunction::from_fn(&g, |r| if r == 0.0 { 0.0 } else { (-r).exp() / r.sqrt() }).unwrap();
        let rep = titchmarsh_check(&s);
        assert!(rep.integrable_at_0 && (rep.origin_exponent - 0.5).abs() < 0.02);
        let s = SampledFunction::from_fn(&g, |r| if r == 0.0 { 0.0 } else { r.powf(-1.5) }).unwrap();
        assert!(!titchmarsh_check(&s).integrable_at_0);
    }

    #[test]
    fn generalized_transform_free_normalisation() {
        let f = SampledFunction::from_fn(&grid(40.0, 4000), |r| (-r).exp()).unwrap();
        let ks = kgrid(0.5, 5.0, 9);
        let gen = generalized_transform(&f, &Potential::zero(), &ks).unwrap();
        let sine = sine_transform(&f, &ks);
        for ((k, a), b) in ks.nodes().iter().zip(&gen.values).zip(&sine.values) {
            assert!((a.re - b.re / k).abs() < 1e-12);
        }
        let at1 = generalized_transform(&f, &Potential::zero(), &KGrid::from_nodes(vec![0.5, 1.0, 2.0]).unwrap()).unwrap();
        assert!((at1.values[1].re - 0.5).abs() < 1e-9);
    }

    #[test]
    fn free_construction_reproduces_exponential() {
        // φ₀ = r, χ₀ = 1, g = e^{-t}: f(r) = ∫_r^∞ (t - r) e^{-t} dt = e^{-r}.
        let g = grid(40.0, 4000);
        let (phi0, chi0) = zero_energy_pair(&Potential::zero(), &g).unwrap();
        let gs = SampledFunction::from_fn(&g, |t| (-t).exp()).unwrap();
        let f = build_f_from_g(&gs, &phi0, &chi0).unwrap();
        for (r, v) in g.nodes().iter().zip(f.values()) {
            assert!((v - (-r).exp()).abs() < 1e-9, "r={r} got {v}");
        }
        let zero = build_f_from_g(&SampledFunction::zero(&g), &phi0, &chi0).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn construction_rejects_slow_tails() {
        let g = grid(40.0, 400);
        let (phi0, chi0) = zero_energy_pair(&Potential::zero(), &g).unwrap();
        let gs = SampledFunction::from_fn(&g, |t| 1.0 / (1.0 + t * t)).unwrap();
        assert!(matches!(build_f_from_g(&gs, &phi0, &chi0), Err(Error::DivergentTail { .. })));
    }

    #[test]
    fn construction_positivity_and_residual() {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let g = grid(40.0, 4000);
        let (phi0, chi0) = zero_energy_pair(&v, &g).unwrap();
        let gs = SampledFunction::from_fn(&g, |t| (-t).exp()).unwrap();
        let f = build_f_from_g(&gs, &phi0, &chi0).unwrap();
        assert!(f.values().iter().all(|&x| x >= 0.0));
        // f(0) = ∫ φ₀ g
        let pg: Vec<f64> = phi0.real_values().iter().zip(gs.values()).map(|(a, b)| a * b).collect();
        assert!((f.values()[0] - simpson(g.nodes(), &pg)).abs() < 1e-9);
        let res = ode_residual_check(&f, &v, &gs).unwrap();
        assert!(res.max_residual <= 1e-4, "{res:?}");
        let t = generalized_transform(&f, &v, &kgrid(0.1, 20.0, 199)).unwrap();
        let scale = t.max_abs();
        assert!(t.values.iter().all(|z| z.re >= -1e-8 * scale));
    }

    #[test]
    fn zero_g_has_zero_residual() {
        let g = grid(5.0, 50);
        let z = SampledFunction::zero(&g);
        let v = Potential::exponential(1.0, 1.0).unwrap();
        assert_eq!(ode_residual_check(&z, &v, &z).unwrap().max_residual, 0.0);
    }

    #[test]
    fn lp_membership_examples() {
        let rep = lp_membership(|t| (-t).exp(), 1.0).unwrap();
        assert_eq!(rep.h1_in_lp_01, Verdict::Pass);
        assert_eq!(rep.h2_in_lp_1inf, Verdict::Pass);
        let rep = lp_membership(|_| 0.0, 1.0).unwrap();
        assert_eq!((rep.h1_in_lp_01, rep.h2_in_lp_1inf), (Verdict::Pass, Verdict::Pass));
        // h₁ = 1/r - 1 for g = t^{-3}: ∫ h₁ diverges logarithmically.
        let rep = lp_membership(|t| t.powi(-3), 1.0).unwrap();
        assert_eq!(rep.h1_in_lp_01, Verdict::Fail);
        let sampled = SampledFunction::from_fn(&grid(30.0, 3000), |t| (-t).exp()).unwrap();
        let rep = lp_membership_check(&sampled, 2.0).unwrap();
        assert_eq!((rep.h1_in_lp_01, rep.h2_in_lp_1inf), (Verdict::Pass, Verdict::Pass));
    }

    #[test]
    fn free_stieltjes_transforms() {
        let g = grid(40.0, 4000);
        let atom = StieltjesMeasure::new(vec![(1.0, 1.0)], SampledFunction::zero(&g)).unwrap();
        let ks = kgrid(0.0, 5.0, 10);
        let res = stieltjes_transform(&atom, &Potential::zero(), &ks).unwrap();
        for (k, z) in ks.nodes().iter().zip(&res.values) {
            assert!((z - Complex64::from_polar(1.0, *k)).norm() < 1e-14);
        }
        let dens = StieltjesMeasure::density_only(SampledFunction::from_fn(&g, |r| (-r).exp()).unwrap()).unwrap();
        let res = stieltjes_transform(&dens, &Potential::zero(), &ks).unwrap();
        for (k, z) in ks.nodes().iter().zip(&res.values) {
            let exact = 1.0 / Complex64::new(1.0, -k);
            assert!((z - exact).norm() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn measure_text_round_trip() {
        let g = grid(1.0, 4);
        let m = StieltjesMeasure::new(vec![(0.5, 2.0), (0.1, 1.0)], SampledFunction::from_fn(&g, |r| 1.0 - r).unwrap()).unwrap();
        assert_eq!(m.atoms()[0].0, 0.1);
        let back = StieltjesMeasure::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(StieltjesMeasure::from_text("atom 1 2\n").is_err());
        assert!(StieltjesMeasure::from_text("atom 1 -2\ndensity\n0 1\n1 1\n2 1\n").is_err());
    }

    #[test]
    fn push_with_zero_kernel_is_identity() {
        let g = grid(5.0, 50);
        let a = solve_kernel(&Potential::zero(), &g, 1e-12, 5).unwrap();
        let alpha = StieltjesMeasure::density_only(SampledFunction::from_fn(&g, |r| (-r).exp()).unwrap()).unwrap();
        let beta = push_measure(&alpha, &a).unwrap();
        for (r, b) in beta.density().nodes().iter().zip(beta.density().values()) {
            assert_eq!(*b, alpha.density().interpolate(*r));
        }
    }

    #[test]
    fn atom_at_origin_adds_kernel_row() {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let g = grid(6.0, 60);
        let a = solve_kernel(&v, &g, 1e-12, 100).unwrap();
        let alpha = StieltjesMeasure::new(vec![(0.0, 1.0)], SampledFunction::zero(&g)).unwrap();
        let beta = push_measure(&alpha, &a).unwrap();
        for (i, b) in beta.density().values().iter().enumerate().take(61) {
            assert_eq!(*b, a.value(0.0, i as f64 * 0.1));
        }
    }

    #[test]
    fn volterra_round_trip_and_picard() {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let g = grid(10.0, 200);
        let a = solve_kernel(&v, &g, 1e-12, 100).unwrap();
        let alpha = StieltjesMeasure::density_only(SampledFunction::from_fn(&g, |r| (-r).exp()).unwrap()).unwrap();
        let beta = push_measure(&alpha, &a).unwrap();
        assert!(beta.total_mass() > alpha.total_mass());
        assert!(beta.density().values().iter().all(|&b| b >= 0.0));
        let back = invert_volterra(beta.density(), &a).unwrap();
        let orig = resample(alpha.density(), 0.05, 400);
        let err = back.values().iter().zip(&orig).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let pic = invert_volterra_picard(beta.density(), &a, 60).unwrap();
        let gap = pic.values().iter().zip(back.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-12, "{gap}");
        assert!(volterra_envelope_check(&back, beta.density(), &a).unwrap().pass);
        let zero = invert_volterra(&SampledFunction::zero(beta.density().grid()), &a).unwrap();
        assert!(zero.values().iter().all(|&x| x == 0.0));
    }
}
