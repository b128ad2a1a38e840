//! Quadrature distributions, Husimi and Wigner functions.
//!
//! The numeric evaluators work on any [`FockVector`]; the `*_closed_coherent`
//! functions evaluate the closed forms for conditional coherent-input states.
//! Quadratures follow `x̂ = (â + â†)/√2` and `α = (x + ip)/√2`.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamsplitter::{BeamSplitterParams, ConditionalIndices};
use crate::error::{Error, Result};
use crate::export::write_csv;
use crate::fock::{CoherentParams, FockVector};
use crate::jpstates::coherent::{ladder_weights, normalization_chi1};
use crate::numerics::{hermite, hermite_functions, laguerre, log_factorial};
use crate::scalar::cpowu;

/// Largest `|x|` accepted by the quadrature evaluators.
pub const MAX_QUADRATURE: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.x, self.p) / SQRT_2
    }
}

/// Local-oscillator phase and a strictly increasing set of `x` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub phi: f64,
    grid: Vec<f64>,
}

impl QuadratureSpec {
    pub fn new(phi: f64, grid: Vec<f64>) -> Result<Self> {
        check_axis(&grid, "quadrature")?;
        if grid.iter().any(|x| x.abs() > MAX_QUADRATURE) {
            return Err(Error::Grid(format!("quadrature grid exceeds |x| <= {MAX_QUADRATURE}")));
        }
        Ok(Self { phi, grid })
    }

    pub fn uniform(phi: f64, lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(phi, linspace(lo, hi, count)?)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

/// Rectangular phase-space grid; values are stored with `p` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    xs: Vec<f64>,
    ps: Vec<f64>,
}

impl PhaseGrid {
    pub fn new(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        check_axis(&xs, "x")?;
        check_axis(&ps, "p")?;
        Ok(Self { xs, ps })
    }

    /// `count × count` points over `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let axis = linspace(lo, hi, count)?;
        Self::new(axis.clone(), axis)
    }

    /// The 121 × 121 grid over `[−6, 6]²` used for the figure data.
    pub fn standard() -> Self {
        Self::square(-6.0, 6.0, 121).expect("static grid")
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        let np = self.ps.len();
        PhasePoint::new(self.xs[i / np], self.ps[i % np])
    }

    /// Evaluates `f` at every point in parallel.
    pub fn evaluate<F>(&self, f: F) -> GridValues
    where
        F: Fn(PhasePoint) -> f64 + Sync,
    {
        let values = (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect();
        GridValues { grid: self.clone(), values }
    }

    /// Fallible variant of [`PhaseGrid::evaluate`]; the first error wins.
    pub fn try_evaluate<F>(&self, f: F) -> Result<GridValues>
    where
        F: Fn(PhasePoint) -> Result<f64> + Sync,
    {
        let values = (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect::<Result<Vec<_>>>()?;
        Ok(GridValues { grid: self.clone(), values })
    }
}

/// A function sampled on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridValues {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
}

impl GridValues {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.grid.ps.len() + ip]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.grid.xs);
        let wp = trapezoid_weights(&self.grid.ps);
        let np = wp.len();
        self.values.iter().enumerate().map(|(i, v)| v * wx[i / np] * wp[i % np]).sum()
    }

    /// Trapezoidal integral over `p` at each `x`.
    pub fn marginal_x(&self) -> Vec<f64> {
        let wp = trapezoid_weights(&self.grid.ps);
        self.values.chunks(wp.len()).map(|row| row.iter().zip(&wp).map(|(v, w)| v * w).sum()).collect()
    }

    /// Columns `x, p, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(
            out,
            &["x", "p", "value"],
            (0..self.values.len()).map(|i| {
                let pt = self.grid.point(i);
                vec![pt.x, pt.p, self.values[i]]
            }),
        )
    }
}

/// A quadrature distribution sampled along a [`QuadratureSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCurve {
    pub spec: QuadratureSpec,
    pub values: Vec<f64>,
}

impl QuadratureCurve {
    pub fn integral(&self) -> f64 {
        trapezoid_weights(&self.spec.grid).iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Columns `x, phi, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(
            out,
            &["x", "phi", "value"],
            self.spec.grid.iter().zip(&self.values).map(|(x, v)| vec![*x, self.spec.phi, *v]),
        )
    }
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::Grid(format!("{name} grid is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::Grid(format!("{name} grid has non-finite values")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    match count {
        0 => Err(Error::Grid("grid needs at least one point".into())),
        1 => Ok(vec![lo]),
        _ => {
            let h = (hi - lo) / (count - 1) as f64;
            Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + h * i as f64 }).collect())
        }
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `|Σ_k c_k e^{−ikφ} ψ_k(x)|²` on every grid point.
pub fn quadrature_dist_numeric(v: &FockVector<f64>, spec: &QuadratureSpec) -> QuadratureCurve {
    let d = v.support_top().map_or(1, |t| t + 1);
    let phases: Vec<Complex64> = (0..d).map(|k| Complex64::from_polar(1.0, -(k as f64) * spec.phi)).collect();
    let coeffs: Vec<Complex64> = v.amps()[..d].iter().zip(&phases).map(|(c, e)| c * e).collect();
    let values = spec
        .grid
        .par_iter()
        .map(|&x| {
            let psi = hermite_functions::<f64>(d, x);
            coeffs.iter().zip(&psi).map(|(c, h)| c * *h).sum::<Complex64>().norm_sqr()
        })
        .collect();
    QuadratureCurve { spec: spec.clone(), values }
}

/// `|⟨α|ψ⟩|² / (2π)`.
pub fn husimi_numeric(v: &FockVector<f64>, pt: PhasePoint) -> f64 {
    let a = pt.alpha().conj();
    let mut term = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in v.amps().iter().enumerate() {
        if k > 0 {
            term *= a / (k as f64).sqrt();
        }
        acc += term * c;
    }
    acc.norm_sqr() / (2.0 * PI)
}

/// `W(x, p)` from the Fock-basis kernel
/// `W_{n+d,n} = (−1)^n/π √(n!/(n+d)!) (√2(x−ip))^d e^{−r²} L_n^d(2r²)`.
/// Each diagonal `d` uses the normalized Laguerre recurrence, so no factorial or
/// polynomial value is formed explicitly.
pub fn wigner_numeric(v: &FockVector<f64>, pt: PhasePoint) -> f64 {
    let c = v.amps();
    let dim = v.support_top().map_or(1, |t| t + 1);
    wigner_kernel_sum(dim, pt, |row, col| c[row] * c[col].conj())
}

/// `W(x, p)` of a density matrix `ρ`, with the same kernel as [`wigner_numeric`].
pub fn wigner_density(rho: &DMatrix<Complex64>, pt: PhasePoint) -> f64 {
    wigner_kernel_sum(rho.nrows().min(rho.ncols()), pt, |row, col| rho[(row, col)])
}

/// `(1/π) Σ_{n,d} ρ_{n+d,n} W_{n+d,n}` with `ρ_{n+d,n} = rho(n+d, n)`.
fn wigner_kernel_sum(dim: usize, pt: PhasePoint, rho: impl Fn(usize, usize) -> Complex64) -> f64 {
    let y = 2.0 * (pt.x * pt.x + pt.p * pt.p);
    let rot = Complex64::from_polar(1.0, -pt.p.atan2(pt.x));
    let mut total = 0.0;
    let mut rot_d = Complex64::new(1.0, 0.0);
    for d in 0..dim {
        if d > 0 {
            rot_d *= rot;
        }
        if d > 0 && y == 0.0 {
            break;
        }
        let df = d as f64;
        let ln_f0 = if d == 0 { 0.0 } else { 0.5 * df * y.ln() } - 0.5 * y - 0.5 * log_factorial::<f64>(d);
        let mut prev = 0.0;
        let mut cur = ln_f0.exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..dim - d {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += rho(n + d, n) * (sign * cur);
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + df - y) * cur - (nf * (nf + df)).sqrt() * prev)
                / ((nf + 1.0) * (nf + df + 1.0)).sqrt();
            prev = cur;
            cur = next;
        }
        total += if d == 0 { acc.re } else { 2.0 * (acc * rot_d).re };
    }
    total / PI
}

/// Precomputed data for the closed-form phase-space functions of a
/// coherent-input conditional state with `β′ = Tβ`.
#[derive(Debug, Clone)]
pub struct CoherentClosedForm {
    beta_p: Complex64,
    idx: ConditionalIndices,
    t2: f64,
    r2: f64,
    /// `w_l = a_l β′^{l−ν} / (l−ν)!` for `l = μ..=n`, zero below `μ`.
    weights: Vec<Complex64>,
    nprime: f64,
}

impl CoherentClosedForm {
    pub fn new(beta: &CoherentParams<f64>, idx: ConditionalIndices, bs: &BeamSplitterParams<f64>) -> Result<Self> {
        let beta_p = beta.attenuated(bs.t()).beta;
        let nu = idx.nu();
        let a = ladder_weights(idx.n, bs.reflectance());
        let weights = (0..=idx.n)
            .map(|l| {
                if l < idx.mu() {
                    return Complex64::new(0.0, 0.0);
                }
                let e = (l as i64 - nu) as usize;
                cpowu(beta_p, e) * (a[l] / log_factorial::<f64>(e).exp())
            })
            .collect();
        let nprime = normalization_chi1(beta_p, idx, bs);
        if !(nprime > 0.0) {
            return Err(Error::Annihilated);
        }
        Ok(Self { beta_p, idx, t2: bs.transmittance(), r2: bs.reflectance(), weights, nprime })
    }

    pub fn beta_prime(&self) -> Complex64 {
        self.beta_p
    }

    pub fn normalization(&self) -> f64 {
        self.nprime
    }

    /// `e^{−[x − √2|β′|cos(φ − φ_β′)]²} / (√π N′) · |Σ_l w_l (e^{−iφ}/√2)^l H_l(x − β′e^{−iφ}/√2)|²`.
    pub fn quadrature(&self, x: f64, phi: f64) -> f64 {
        let bp = self.beta_p;
        let shift = bp.norm() * (phi - bp.arg()).cos() * SQRT_2;
        let e = Complex64::from_polar(1.0 / SQRT_2, -phi);
        let arg = Complex64::new(x, 0.0) - bp * e;
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, w) in self.weights.iter().enumerate().skip(self.idx.mu()) {
            acc += w * cpowu(e, l) * hermite::<f64, Complex64>(l, arg);
        }
        (-(x - shift).powi(2)).exp() / (PI.sqrt() * self.nprime) * acc.norm_sqr()
    }

    /// Compact Laguerre form of the Husimi function:
    /// `|T|^{4n}(n!)² (|R|²/|T|²)^{2μ} |α|^{2μ} |β′|^{2(μ−ν)} e^{−|α−β′|²}
    ///  |L_{n−μ}^{|ν|}(|R|²α*β′/|T|²)|² / (2π N′ ((n+δ)!)²)`.
    pub fn husimi(&self, pt: PhasePoint) -> f64 {
        let idx = self.idx;
        let (n, mu) = (idx.n, idx.mu());
        let alpha = pt.alpha();
        let bp = self.beta_p;
        let ratio = self.r2 / self.t2;
        let lag = laguerre::<f64, Complex64>(n - mu, idx.abs_nu() as f64, alpha.conj() * bp * ratio);
        let excess = (mu as i64 - idx.nu()) as i32;
        let ln_fact = 2.0 * (log_factorial::<f64>(n) - log_factorial::<f64>(n + idx.delta()));
        let pref = self.t2.powi(2 * n as i32)
            * ln_fact.exp()
            * ratio.powi(2 * mu as i32)
            * alpha.norm_sqr().powi(mu as i32)
            * bp.norm_sqr().powi(excess);
        pref * (-(alpha - bp).norm_sqr()).exp() * lag.norm_sqr() / (2.0 * PI * self.nprime)
    }

    /// Husimi function from the double sum `|Σ_l w_l α*^l|²`.
    pub fn husimi_sum(&self, pt: PhasePoint) -> f64 {
        let alpha = pt.alpha();
        let acc: Complex64 =
            self.weights.iter().enumerate().skip(self.idx.mu()).map(|(l, w)| w * cpowu(alpha.conj(), l)).sum();
        (-(alpha - self.beta_p).norm_sqr()).exp() * acc.norm_sqr() / (2.0 * PI * self.nprime)
    }

    /// `e^{−|x+ip−√2β′|²}/(πN′) Σ_{l,l′} w_l w_{l′}* χ⁽³⁾_{l′,l}(√2(x+ip) − β′)`.
    pub fn wigner(&self, pt: PhasePoint) -> f64 {
        let s = Complex64::new(pt.x, pt.p);
        let bp = self.beta_p;
        let arg = s * SQRT_2 - bp;
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, w) in self.weights.iter().enumerate().skip(self.idx.mu()) {
            for (lp, wp) in self.weights.iter().enumerate().skip(self.idx.mu()) {
                acc += w * wp.conj() * chi3(lp, l, arg);
            }
        }
        (-(s - bp * SQRT_2).norm_sqr()).exp() / (PI * self.nprime) * acc.re
    }
}

/// `χ⁽³⁾_{l,k}(α)`: `(−1)^k k! α^{l−k} L_k^{l−k}(|α|²)` for `l ≥ k`, and
/// `(−1)^l l! (α*)^{k−l} L_l^{k−l}(|α|²)` otherwise.
pub fn chi3(l: usize, k: usize, alpha: Complex64) -> Complex64 {
    let x = alpha.norm_sqr();
    let (lo, d, base) = if l >= k { (k, l - k, alpha) } else { (l, k - l, alpha.conj()) };
    let sign = if lo % 2 == 0 { 1.0 } else { -1.0 };
    cpowu(base, d) * (sign * log_factorial::<f64>(lo).exp() * laguerre::<f64, f64>(lo, d as f64, x))
}

/// Closed-form quadrature distribution of the conditional coherent-input state.
pub fn quadrature_dist_closed_coherent(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    spec: &QuadratureSpec,
) -> Result<QuadratureCurve> {
    let cf = CoherentClosedForm::new(beta, idx, bs)?;
    let values = spec.grid.par_iter().map(|&x| cf.quadrature(x, spec.phi)).collect();
    Ok(QuadratureCurve { spec: spec.clone(), values })
}

/// Closed-form Husimi function at one point.
pub fn husimi_closed_coherent(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    pt: PhasePoint,
) -> Result<f64> {
    Ok(CoherentClosedForm::new(beta, idx, bs)?.husimi(pt))
}

/// Closed-form Wigner function at one point.
pub fn wigner_closed_coherent(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    pt: PhasePoint,
) -> Result<f64> {
    Ok(CoherentClosedForm::new(beta, idx, bs)?.wigner(pt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;
    use crate::jpstates::{coherent_dim_for, psjp_pajp_coherent};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn idx(n: usize, m: usize) -> ConditionalIndices {
        ConditionalIndices::new(n, m)
    }

    /// β chosen so that `β′ = 2.07` at `|T|² = 0.81`.
    fn fig_setup() -> (CoherentParams<f64>, BeamSplitterParams<f64>) {
        let b = BeamSplitterParams::from_transmittance(0.81).unwrap();
        (CoherentParams::new(c(2.07 / 0.9, 0.0)), b)
    }

    fn state(beta: &CoherentParams<f64>, i: ConditionalIndices, b: &BeamSplitterParams<f64>) -> FockVector<f64> {
        psjp_pajp_coherent(beta, i, b, coherent_dim_for(beta, i)).unwrap().state
    }

    /// Adaptive Simpson rule on `[a, b]`.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    /// `(1/π) ∫ e^{2ipy} ψ(x−y) ψ*(x+y) dy` by adaptive quadrature.
    fn wigner_by_integration(v: &FockVector<f64>, pt: PhasePoint) -> f64 {
        let psi = |u: f64| -> Complex64 {
            let h = hermite_functions::<f64>(v.dim(), u);
            v.amps().iter().zip(&h).map(|(c, h)| c * *h).sum()
        };
        let f = |y: f64| (Complex64::from_polar(1.0, 2.0 * pt.p * y) * psi(pt.x - y) * psi(pt.x + y).conj()).re;
        adaptive_simpson(&f, -14.0, 14.0, 1e-11) / PI
    }

    #[test]
    fn vacuum_quadrature_is_ground_state_gaussian() {
        let spec = QuadratureSpec::uniform(0.3, -5.0, 5.0, 101).unwrap();
        let q = quadrature_dist_numeric(&FockVector::basis(1, 0), &spec);
        for (x, v) in spec.grid().iter().zip(&q.values) {
            assert!((v - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
        }
        assert!((q.values[50] - 0.5641895835477563).abs() < 1e-12);
    }

    #[test]
    fn coherent_quadrature_is_displaced() {
        let beta = 1.3;
        let coh = coherent_state(&CoherentParams::new(c(beta, 0.0)), 40).unwrap();
        let spec = QuadratureSpec::uniform(0.0, -8.0, 8.0, 801).unwrap();
        let q = quadrature_dist_numeric(&coh, &spec);
        for (x, v) in spec.grid().iter().zip(&q.values) {
            let expect = (-(x - SQRT_2 * beta).powi(2)).exp() / PI.sqrt();
            assert!((v - expect).abs() < 1e-12);
        }
        assert!((q.integral() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grid_validation() {
        assert!(QuadratureSpec::new(0.0, vec![0.0, 0.0]).is_err());
        assert!(QuadratureSpec::new(0.0, vec![0.0, 41.0]).is_err());
        assert!(PhaseGrid::new(vec![1.0, 0.0], vec![0.0]).is_err());
        assert_eq!(PhaseGrid::standard().len(), 121 * 121);
    }

    #[test]
    fn closed_quadrature_matches_numeric() {
        let (beta, b) = fig_setup();
        for &(n, m) in &[(2, 3), (3, 2), (0, 0), (1, 4), (4, 1)] {
            let v = state(&beta, idx(n, m), &b);
            for &phi in &[0.0, 0.7, PI / 2.0, 2.5] {
                let spec = QuadratureSpec::uniform(phi, -6.0, 6.0, 121).unwrap();
                let num = quadrature_dist_numeric(&v, &spec);
                let cl = quadrature_dist_closed_coherent(&beta, idx(n, m), &b, &spec).unwrap();
                for (a, e) in cl.values.iter().zip(&num.values) {
                    assert!((a - e).abs() < 1e-8, "n={n} m={m} phi={phi}: {a} vs {e}");
                }
            }
        }
    }

    #[test]
    fn closed_quadrature_is_periodic() {
        let (beta, b) = fig_setup();
        let cf = CoherentClosedForm::new(&beta, idx(3, 2), &b).unwrap();
        for &x in &[-1.0, 0.4, 2.9] {
            assert!((cf.quadrature(x, 0.8) - cf.quadrature(x, 0.8 + 2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_quadrature_zero_zero_is_coherent() {
        let beta = CoherentParams::new(c(1.2, 0.5));
        let b = BeamSplitterParams::from_transmittance_phases(0.6, 0.4, 0.0).unwrap();
        let cf = CoherentClosedForm::new(&beta, idx(0, 0), &b).unwrap();
        let bp = cf.beta_prime();
        for &x in &[-2.0, 0.0, 1.5] {
            for &phi in &[0.0, 1.1] {
                let centre = SQRT_2 * bp.norm() * (phi - bp.arg()).cos();
                let expect = (-(x - centre).powi(2)).exp() / PI.sqrt();
                assert!((cf.quadrature(x, phi) - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn husimi_closed_matches_overlap() {
        let b = BeamSplitterParams::from_transmittance_phases(0.81, 0.3, -0.2).unwrap();
        let beta = CoherentParams::new(c(2.0, 0.9));
        let grid = PhaseGrid::square(-6.0, 6.0, 41).unwrap();
        for n in 0..=4 {
            for m in 0..=4 {
                let v = state(&beta, idx(n, m), &b);
                let cf = CoherentClosedForm::new(&beta, idx(n, m), &b).unwrap();
                for i in 0..grid.len() {
                    let pt = grid.point(i);
                    let num = husimi_numeric(&v, pt);
                    assert!((cf.husimi(pt) - num).abs() < 1e-10, "n={n} m={m} {pt:?}");
                    assert!((cf.husimi_sum(pt) - num).abs() < 1e-10, "n={n} m={m} {pt:?}");
                    assert!(num >= 0.0);
                }
            }
        }
    }

    #[test]
    fn coherent_husimi_peak() {
        let (beta, b) = fig_setup();
        let cf = CoherentClosedForm::new(&beta, idx(0, 0), &b).unwrap();
        let bp = cf.beta_prime();
        let peak = cf.husimi(PhasePoint::new(SQRT_2 * bp.re, SQRT_2 * bp.im));
        assert!((peak - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((peak - 0.159).abs() < 1e-3);
    }

    #[test]
    fn husimi_bound_and_ordering() {
        let (beta, b) = fig_setup();
        let grid = PhaseGrid::standard();
        let bound = 1.0 / (2.0 * PI);
        let sub = grid.evaluate(|pt| husimi_numeric(&state(&beta, idx(2, 3), &b), pt));
        let add = grid.evaluate(|pt| husimi_numeric(&state(&beta, idx(3, 2), &b), pt));
        assert!(sub.max() <= bound + 1e-9 && add.max() <= bound + 1e-9);
        assert!(bound - sub.max() > 1e-6 && bound - add.max() > 1e-6);
        assert!(sub.max() > add.max());
    }

    #[test]
    fn single_photon_wigner_minimum() {
        let w = wigner_numeric(&FockVector::basis(2, 1), PhasePoint::new(0.0, 0.0));
        assert!((w + 1.0 / PI).abs() < 1e-15);
        let vac = wigner_numeric(&FockVector::basis(1, 0), PhasePoint::new(0.3, -0.4));
        assert!((vac - (-0.25f64).exp() / PI).abs() < 1e-15);
    }

    #[test]
    fn wigner_kernel_matches_integration() {
        let (beta, b) = fig_setup();
        let v = state(&beta, idx(3, 2), &b);
        let pts = [(0.0, 0.0), (2.9, 0.1), (-1.5, 2.0), (4.0, -3.0), (5.5, 5.5)];
        for &(x, p) in &pts {
            let pt = PhasePoint::new(x, p);
            let a = wigner_numeric(&v, pt);
            let e = wigner_by_integration(&v, pt);
            assert!((a - e).abs() < 1e-9, "{pt:?}: {a} vs {e}");
        }
        let fock = FockVector::basis(31, 30);
        for &(x, p) in &pts {
            let pt = PhasePoint::new(x, p);
            assert!((wigner_numeric(&fock, pt) - wigner_by_integration(&fock, pt)).abs() < 1e-9);
        }
    }

    #[test]
    fn coherent_wigner_is_gaussian() {
        let beta = c(1.1, -0.6);
        let coh = coherent_state(&CoherentParams::new(beta), 40).unwrap();
        for &(x, p) in &[(0.0, 0.0), (1.5, -0.8), (-2.0, 1.0)] {
            let s = c(x, p);
            let expect = (-(s - beta * SQRT_2).norm_sqr()).exp() / PI;
            assert!((wigner_numeric(&coh, PhasePoint::new(x, p)) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_wigner_matches_numeric() {
        let (beta, b) = fig_setup();
        let grid = PhaseGrid::square(-6.0, 6.0, 61).unwrap();
        for &(n, m) in &[(2, 3), (3, 2), (0, 0), (2, 2), (4, 0), (0, 3)] {
            let v = state(&beta, idx(n, m), &b);
            let cf = CoherentClosedForm::new(&beta, idx(n, m), &b).unwrap();
            for i in 0..grid.len() {
                let pt = grid.point(i);
                let (a, e) = (cf.wigner(pt), wigner_numeric(&v, pt));
                assert!((a - e).abs() < 1e-8, "n={n} m={m} {pt:?}: {a} vs {e}");
            }
        }
    }

    #[test]
    fn wigner_normalization_and_marginal() {
        let (beta, b) = fig_setup();
        let v = state(&beta, idx(3, 2), &b);
        let grid = PhaseGrid::square(-10.0, 10.0, 201).unwrap();
        let w = grid.evaluate(|pt| wigner_numeric(&v, pt));
        assert!((w.integral() - 1.0).abs() < 1e-6, "{}", w.integral());
        let spec = QuadratureSpec::new(0.0, grid.xs().to_vec()).unwrap();
        let q = quadrature_dist_numeric(&v, &spec);
        for (a, e) in w.marginal_x().iter().zip(&q.values) {
            assert!((a - e).abs() < 1e-6);
        }
    }

    #[test]
    fn wigner_negativity_ordering() {
        let (beta, b) = fig_setup();
        let grid = PhaseGrid::standard();
        let sub = grid.evaluate(|pt| wigner_numeric(&state(&beta, idx(2, 3), &b), pt));
        let add = grid.evaluate(|pt| wigner_numeric(&state(&beta, idx(3, 2), &b), pt));
        assert!(add.min() < sub.min() && sub.min() < 0.0, "{} {}", add.min(), sub.min());
    }

    #[test]
    fn smoothed_wigner_is_husimi() {
        let (beta, b) = fig_setup();
        let v = state(&beta, idx(2, 3), &b);
        let h = 0.1;
        let grid = PhaseGrid::square(-9.0, 9.0, 181).unwrap();
        let w = grid.evaluate(|pt| wigner_numeric(&v, pt));
        for &(x, p) in &[(0.0, 0.0), (2.9, 0.0), (1.0, -1.5), (4.0, 2.0)] {
            let mut acc = 0.0;
            for i in 0..grid.len() {
                let q = grid.point(i);
                acc += w.values[i] * (-(q.x - x).powi(2) - (q.p - p).powi(2)).exp() / PI * h * h;
            }
            let e = husimi_numeric(&v, PhasePoint::new(x, p));
            assert!((acc - e).abs() < 2e-4, "({x}, {p}): {acc} vs {e}");
        }
    }

    #[test]
    fn grid_csv_layout() {
        let grid = PhaseGrid::square(-1.0, 1.0, 3).unwrap();
        let vals = grid.evaluate(|pt| pt.x + 10.0 * pt.p);
        let mut buf = Vec::new();
        vals.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("x,p,value\n"));
        assert_eq!(vals.at(2, 0), 1.0 - 10.0);
    }
}
