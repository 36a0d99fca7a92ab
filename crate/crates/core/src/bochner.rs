//! Functions of positive type: Fourier transforms of half-line measures and
//! randomized Gram-matrix tests.
//!
//! Samplers are evaluated on `k >= 0` only and extended to negative
//! arguments by `F(-x) = conj F(x)`; the Gram matrix needs differences of
//! both signs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{KGrid, RadialGrid};
use crate::marchenko::solve_kernel;
use crate::potential::Potential;
use crate::quadrature::{filon, simpson};
use crate::transforms::{push_measure, stieltjes_transform, StieltjesEvaluator, StieltjesMeasure, TransformResult};

/// `F(x) = ∫ e^{ixt} dα(t)`: atoms exactly, the density by Filon.
/// The error column is the change under halving the density resolution.
pub fn bochner_transform(alpha: &StieltjesMeasure, xgrid: &KGrid) -> TransformResult {
    let d = alpha.density();
    let t = d.nodes();
    let rho = d.values();
    let coarse: Vec<usize> = {
        let mut idx: Vec<usize> = (0..t.len()).step_by(2).collect();
        if *idx.last().unwrap() != t.len() - 1 {
            idx.push(t.len() - 1);
        }
        idx
    };
    let tc: Vec<f64> = coarse.iter().map(|&i| t[i]).collect();
    let rc: Vec<f64> = coarse.iter().map(|&i| rho[i]).collect();
    let mut values = Vec::with_capacity(xgrid.len());
    let mut errors = Vec::with_capacity(xgrid.len());
    for &x in xgrid.nodes() {
        let atoms: Complex64 = alpha.atoms().iter().map(|&(s, w)| Complex64::from_polar(w, x * s)).sum();
        let (fine, rough) = if x == 0.0 {
            (Complex64::new(simpson(t, rho), 0.0), Complex64::new(simpson(&tc, &rc), 0.0))
        } else {
            (filon(t, rho, x), filon(&tc, &rc, x))
        };
        values.push(atoms + fine);
        errors.push((fine - rough).norm() / 7.0);
    }
    TransformResult { kgrid: xgrid.clone(), values, errors }
}

/// One Gram-matrix trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub points: Vec<f64>,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub pass: bool,
}

/// Worst case over all trials; `pass` iff every trial has
/// `min_eigenvalue >= -tol·trace`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveTypeReport {
    pub sample_points: Vec<f64>,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub pass: bool,
    pub trials: usize,
    /// Worst `min_eigenvalue / trace` over the trials.
    pub relative_margin: f64,
    pub records: Vec<TrialRecord>,
}

impl PositiveTypeReport {
    /// One JSON object per trial, newline-terminated.
    pub fn to_json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("plain data serializes"));
            s.push('\n');
        }
        s
    }
}

/// Relative round-off allowed in `M - Mᴴ` before the sampler is rejected.
const HERMITIAN_TOL: f64 = 1e-12;

/// `(min eigenvalue, trace)` of `M_{mn} = F(x_m - x_n)`. `F` is called on the
/// raw differences, so a sampler without conjugate symmetry is detected.
pub fn gram_spectrum<F>(f: F, points: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let s = points.len();
    let mut m = DMatrix::<Complex64>::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            m[(i, j)] = f(points[i] - points[j])?;
        }
    }
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
    let gap = (&m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if gap > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian(gap));
    }
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = h.diagonal().iter().map(|z| z.re).sum();
    let eig = h.symmetric_eigenvalues();
    Ok((eig.iter().copied().fold(f64::INFINITY, f64::min), trace))
}

/// Sample points uniform on `[0, k_max]`, the second placed within
/// `1e-3·k_max` of the first to make the Gram matrix nearly singular.
fn draw_points(rng: &mut ChaCha8Rng, s: usize, k_max: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..s).map(|_| rng.gen::<f64>() * k_max).collect();
    let close = 1e-3 * k_max * rng.gen::<f64>();
    x[1] = if x[0] + close <= k_max { x[0] + close } else { x[0] - close };
    x
}

/// Gram test of `F` over `trials` random point sets of size `s`.
/// `F` only sees the differences `x_m - x_n`, which lie in `[-k_max, k_max]`.
pub fn positive_type_check<F>(f: F, k_max: f64, s: usize, trials: usize, tol: f64, seed: u64) -> Result<PositiveTypeReport>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if s < 2 || trials == 0 || !(k_max > 0.0) || !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need s >= 2, trials >= 1, k_max > 0, tol >= 0 (got {s}, {trials}, {k_max}, {tol})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(trials);
    for _ in 0..trials {
        let points = draw_points(&mut rng, s, k_max);
        let (min_eigenvalue, trace) = gram_spectrum(&f, &points)?;
        let pass = min_eigenvalue >= -tol * trace;
        records.push(TrialRecord { points, min_eigenvalue, trace, pass });
    }
    let rel = |r: &TrialRecord| if r.trace > 0.0 { r.min_eigenvalue / r.trace } else { r.min_eigenvalue };
    let worst = records
        .iter()
        .min_by(|a, b| rel(a).partial_cmp(&rel(b)).unwrap())
        .expect("at least one trial");
    Ok(PositiveTypeReport {
        sample_points: worst.points.clone(),
        min_eigenvalue: worst.min_eigenvalue,
        trace: worst.trace,
        pass: records.iter().all(|r| r.pass),
        trials,
        relative_margin: rel(worst),
        records,
    })
}

/// Wraps a sampler defined for `x >= 0` with the Hermitian extension.
pub fn hermitian_extension<F>(f: F) -> impl Fn(f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    move |x| if x >= 0.0 { f(x) } else { f(-x).map(|z| z.conj()) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Options {
    pub s: usize,
    pub trials: usize,
    /// Points are drawn from `[0, k_max]`.
    pub k_max: f64,
    /// Relative eigenvalue tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Nodes of the k-grid on `[0, k_max]` for the two-path comparison.
    pub compare_nodes: usize,
}

impl Default for Theorem4Options {
    fn default() -> Self {
        Self { s: 8, trials: 50, k_max: 10.0, tol: 1e-8, seed: 0, compare_nodes: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Report {
    pub gram: PositiveTypeReport,
    /// `max_k |∫ f(k, r) dα(r) - ∫ e^{ikr} dβ(r)|` with `β` the pushed measure.
    pub two_path_max: f64,
    /// `max_k |f̃(k)| / ((1 + ∫|A|)·mass(α))`; at most 1.
    pub bound_ratio: f64,
}

/// Positive-type test of `f̃(k) = ∫ f(k, r) dα(r)` together with the
/// comparison against the Fourier transform of the pushed measure.
///
/// The kernel is solved on the density grid of `alpha`, which must be
/// uniform; its extent doubles as the truncation radius of the kernel.
pub fn theorem4_forward_check(alpha: &StieltjesMeasure, v: &Potential, opts: &Theorem4Options) -> Result<Theorem4Report> {
    if alpha.is_signed() {
        return Err(Error::InvalidParameter("alpha must be a non-negative measure".into()));
    }
    let grid: &RadialGrid = alpha.density().grid();
    if grid.uniform_step().is_none() {
        return Err(Error::InvalidGrid("the density of alpha must live on a uniform grid".into()));
    }
    let a = solve_kernel(v, grid, 1e-13, 500)?;
    let kgrid = KGrid::uniform(0.0, opts.k_max, opts.compare_nodes)?;
    let direct = stieltjes_transform(alpha, v, &kgrid)?;
    let beta = push_measure(alpha, &a)?;
    let pushed = bochner_transform(&beta, &kgrid);
    let two_path_max = direct
        .values
        .iter()
        .zip(&pushed.values)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let mass = alpha.total_mass();
    let a_mass = a.max_row_integral() + v.first_moment_tail(0.5 * grid.r_max());
    let bound = (1.0 + a_mass) * mass;
    let bound_ratio = if bound > 0.0 { direct.max_abs() / bound } else { 0.0 };
    let eval = StieltjesEvaluator::new(alpha, v)?;
    let gram = positive_type_check(|x| eval.eval(x), opts.k_max, opts.s, opts.trials, opts.tol, opts.seed)?;
    Ok(Theorem4Report { gram, two_path_max, bound_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::SampledFunction;

    fn exp_density(r: f64, n: usize) -> StieltjesMeasure {
        let g = RadialGrid::uniform(r, n).unwrap();
        StieltjesMeasure::density_only(SampledFunction::from_fn(&g, |t| (-t).exp()).unwrap()).unwrap()
    }

    #[test]
    fn transforms_of_simple_measures() {
        let xs = KGrid::uniform(0.0, 8.0, 33).unwrap();
        let g = RadialGrid::uniform(4.0, 8).unwrap();
        let atom = StieltjesMeasure::new(vec![(2.0, 1.0)], SampledFunction::zero(&g)).unwrap();
        let res = bochner_transform(&atom, &xs);
        for (x, z) in xs.nodes().iter().zip(&res.values) {
            assert!((z - Complex64::from_polar(1.0, 2.0 * x)).norm() < 1e-15);
        }
        let res = bochner_transform(&exp_density(40.0, 4000), &xs);
        assert!((res.values[0].re - 1.0).abs() < 1e-10);
        for (x, z) in xs.nodes().iter().zip(&res.values) {
            assert!((z - 1.0 / Complex64::new(1.0, -x)).norm() < 1e-9, "x={x}");
            assert!(z.norm() <= res.values[0].re + 1e-12);
        }
        let zero = StieltjesMeasure::density_only(SampledFunction::zero(&g)).unwrap();
        assert!(bochner_transform(&zero, &xs).values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn plane_wave_gram_is_rank_one() {
        let f = |x: f64| Ok(Complex64::from_polar(1.0, 3.0 * x));
        let pts = [0.0, 0.4, 1.7, 2.2, 5.0];
        let (min, trace) = gram_spectrum(f, &pts).unwrap();
        assert!(min.abs() < 1e-12 && (trace - 5.0).abs() < 1e-12);
        let rep = positive_type_check(f, 10.0, 8, 20, 1e-8, 7).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn non_hermitian_sampler_is_rejected() {
        let f = |x: f64| Ok(Complex64::new(x, 0.0));
        assert!(matches!(gram_spectrum(f, &[0.0, 1.0]), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn non_positive_function_fails() {
        // -cos x is the transform of a negative measure.
        let f = |x: f64| Ok(Complex64::new(-x.cos(), 0.0));
        let rep = positive_type_check(f, 5.0, 4, 10, 1e-8, 1).unwrap();
        assert!(!rep.pass && rep.min_eigenvalue < 0.0);
    }

    #[test]
    fn cauchy_transform_is_positive_type() {
        let f = hermitian_extension(|x: f64| Ok(1.0 / Complex64::new(1.0, -x)));
        let rep = positive_type_check(f, 10.0, 8, 50, 1e-8, 42).unwrap();
        assert!(rep.pass, "{}", rep.relative_margin);
        assert_eq!(rep.records.len(), 50);
        assert_eq!(rep.to_json_lines().lines().count(), 50);
        let again = positive_type_check(hermitian_extension(|x: f64| Ok(1.0 / Complex64::new(1.0, -x))), 10.0, 8, 50, 1e-8, 42).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn free_atom_matches_bochner_case() {
        let g = RadialGrid::uniform(4.0, 40).unwrap();
        let atom = StieltjesMeasure::new(vec![(1.0, 1.0)], SampledFunction::zero(&g)).unwrap();
        let opts = Theorem4Options { trials: 10, ..Default::default() };
        let rep = theorem4_forward_check(&atom, &Potential::zero(), &opts).unwrap();
        assert!(rep.gram.pass);
        assert!(rep.two_path_max < 1e-14);
    }

    #[test]
    fn zero_measure_is_trivially_positive() {
        let g = RadialGrid::uniform(10.0, 100).unwrap();
        let zero = StieltjesMeasure::density_only(SampledFunction::zero(&g)).unwrap();
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let opts = Theorem4Options { trials: 3, ..Default::default() };
        let rep = theorem4_forward_check(&zero, &v, &opts).unwrap();
        assert!(rep.gram.pass && rep.two_path_max == 0.0 && rep.gram.trace == 0.0);
    }
}
