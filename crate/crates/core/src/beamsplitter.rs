//! Exact two-mode beam-splitter transform and photon-number conditioning.
//!
//! This module is the brute-force reference: the output state is built from
//! the factored unitary `T^{n̂₁} e^{−R* â₂†â₁} e^{R â₁†â₂} T^{−n̂₂}` in a
//! product basis large enough to hold every total photon number present in
//! the input, then projected onto a detector outcome.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::numerics::{binomial, log_factorial};
use crate::scalar::{cpowu, Real};

/// Unitarity defect allowed in [`transform_two_mode`].
pub const LEAKAGE_BUDGET: f64 = 1e-10;

/// [`LEAKAGE_BUDGET`], raised to the rounding floor of low-precision scalars.
pub fn leakage_budget<T: Real>() -> T {
    T::lit(LEAKAGE_BUDGET).max(T::epsilon() * T::lit(256.0))
}
/// Raw outcome probabilities below this are reported as unreachable.
pub const UNREACHABLE_PROBABILITY: f64 = 1e-300;

/// Lossless beam splitter `T = cos θ e^{iφ_T}`, `R = sin θ e^{iφ_R}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterParams<T: Real = f64> {
    pub theta: T,
    pub phi_t: T,
    pub phi_r: T,
}

impl<T: Real> BeamSplitterParams<T> {
    pub fn new(theta: T, phi_t: T, phi_r: T) -> Self {
        Self { theta, phi_t, phi_r }
    }

    /// From the intensity transmittance `|T|² ∈ [0, 1]` with zero phases.
    pub fn from_transmittance(t2: T) -> Result<Self> {
        Self::from_transmittance_phases(t2, T::zero(), T::zero())
    }

    pub fn from_transmittance_phases(t2: T, phi_t: T, phi_r: T) -> Result<Self> {
        if !(t2 >= T::zero() && t2 <= T::one()) {
            return Err(Error::invalid(format!("|T|^2 = {t2} outside [0, 1]")));
        }
        Ok(Self { theta: t2.sqrt().acos(), phi_t, phi_r })
    }

    pub fn t(&self) -> Complex<T> {
        Complex::from_polar(self.theta.cos(), self.phi_t)
    }

    pub fn r(&self) -> Complex<T> {
        Complex::from_polar(self.theta.sin(), self.phi_r)
    }

    pub fn transmittance(&self) -> T {
        let c = self.theta.cos();
        c * c
    }

    pub fn reflectance(&self) -> T {
        let s = self.theta.sin();
        s * s
    }
}

/// Abbreviations `ν = n − m`, `μ = max(0, ν)`, `δ = μ − ν` for an input count `n`
/// and a detected count `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalIndices {
    pub n: usize,
    pub m: usize,
}

impl ConditionalIndices {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    pub fn nu(&self) -> i64 {
        self.n as i64 - self.m as i64
    }

    pub fn mu(&self) -> usize {
        self.n.saturating_sub(self.m)
    }

    pub fn delta(&self) -> usize {
        self.m.saturating_sub(self.n)
    }

    pub fn abs_nu(&self) -> usize {
        self.n.abs_diff(self.m)
    }
}

/// Pure two-mode state over `|k₁⟩ ⊗ |k₂⟩`, stored row-major in `k₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState<T: Real = f64> {
    d1: usize,
    d2: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> TwoModeState<T> {
    pub fn zeros(d1: usize, d2: usize) -> Self {
        Self { d1, d2, amps: vec![Complex::default(); d1 * d2] }
    }

    pub fn from_amps(d1: usize, d2: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != d1 * d2 {
            return Err(Error::DimensionMismatch { expected: d1 * d2, got: amps.len() });
        }
        Ok(Self { d1, d2, amps })
    }

    /// `a ⊗ b`.
    pub fn product(a: &FockVector<T>, b: &FockVector<T>) -> Self {
        let (d1, d2) = (a.dim(), b.dim());
        let mut amps = Vec::with_capacity(d1 * d2);
        for x in a.amps() {
            for y in b.amps() {
                amps.push(x * y);
            }
        }
        Self { d1, d2, amps }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    #[inline]
    pub fn get(&self, k1: usize, k2: usize) -> Complex<T> {
        if k1 < self.d1 && k2 < self.d2 {
            self.amps[k1 * self.d2 + k2]
        } else {
            Complex::default()
        }
    }

    #[inline]
    fn set(&mut self, k1: usize, k2: usize, v: Complex<T>) {
        self.amps[k1 * self.d2 + k2] = v;
    }

    pub fn amps(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Same amplitudes in a `(d1, d2)` box, dropping anything outside.
    pub fn resized(&self, d1: usize, d2: usize) -> Self {
        let mut out = Self::zeros(d1, d2);
        for k1 in 0..d1.min(self.d1) {
            for k2 in 0..d2.min(self.d2) {
                out.set(k1, k2, self.get(k1, k2));
            }
        }
        out
    }

    /// `⟨self|other⟩` over the common box.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let mut acc = Complex::default();
        for k1 in 0..self.d1.min(other.d1) {
            for k2 in 0..self.d2.min(other.d2) {
                acc += self.get(k1, k2).conj() * other.get(k1, k2);
            }
        }
        acc
    }

    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    /// `(⟨n̂₁⟩, ⟨n̂₂⟩)` relative to the squared norm.
    pub fn mean_photon_numbers(&self) -> (T, T) {
        let total = self.norm_sqr();
        let (mut n1, mut n2) = (T::zero(), T::zero());
        for k1 in 0..self.d1 {
            for k2 in 0..self.d2 {
                let p = self.get(k1, k2).norm_sqr();
                n1 += T::from_usize_exact(k1) * p;
                n2 += T::from_usize_exact(k2) * p;
            }
        }
        (n1 / total, n2 / total)
    }

    /// Unnormalized `⟨m|₂ ψ⟩`.
    pub fn project_second(&self, m: usize) -> FockVector<T> {
        FockVector::from_fn(self.d1, |k1| self.get(k1, m))
    }
}

/// Normalized conditional state of mode 1 and the raw event probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOutcome<T: Real = f64> {
    pub state: FockVector<T>,
    pub probability: T,
    pub indices: ConditionalIndices,
}

impl<T: Real> ConditionalOutcome<T> {
    pub fn n(&self) -> usize {
        self.indices.n
    }

    pub fn m(&self) -> usize {
        self.indices.m
    }

    pub fn nu(&self) -> i64 {
        self.indices.nu()
    }
}

/// `e^{c â_to† â_from}` acting on the product box, for `from`/`to` either
/// (mode 2 → mode 1) or (mode 1 → mode 2).
fn exp_hop<T: Real>(s: &TwoModeState<T>, c: Complex<T>, into_first: bool) -> TwoModeState<T> {
    let (d1, d2) = s.dims();
    let mut out = TwoModeState::zeros(d1, d2);
    let half = T::lit(0.5);
    let max_n = d1.max(d2);
    let powers: Vec<Complex<T>> = (0..max_n).map(|j| cpowu(c, j)).collect();
    for k1 in 0..d1 {
        for k2 in 0..d2 {
            let a = s.get(k1, k2);
            if a.norm_sqr() == T::zero() {
                continue;
            }
            let (src, dst, dst_cap) = if into_first { (k2, k1, d1) } else { (k1, k2, d2) };
            for j in 0..=src {
                if dst + j >= dst_cap {
                    break;
                }
                let ln_mag = half
                    * (log_factorial::<T>(dst + j) - log_factorial::<T>(dst) + log_factorial::<T>(src)
                        - log_factorial::<T>(src - j))
                    - log_factorial::<T>(j);
                let coeff = powers[j] * ln_mag.exp();
                let (t1, t2) = if into_first { (k1 + j, k2 - j) } else { (k1 - j, k2 + j) };
                let cur = out.get(t1, t2);
                out.set(t1, t2, cur + a * coeff);
            }
        }
    }
    out
}

fn number_phase<T: Real>(s: &TwoModeState<T>, first: Complex<T>, second: Complex<T>) -> TwoModeState<T> {
    let (d1, d2) = s.dims();
    let p1: Vec<_> = (0..d1).map(|k| cpowu(first, k)).collect();
    let p2: Vec<_> = (0..d2).map(|k| cpowu(second, k)).collect();
    let mut out = s.clone();
    for k1 in 0..d1 {
        for k2 in 0..d2 {
            out.set(k1, k2, s.get(k1, k2) * p1[k1] * p2[k2]);
        }
    }
    out
}

/// Output of the beam splitter for a pure two-mode input, together with the
/// unitarity defect `|1 − ‖out‖²/‖in‖²|`.
///
/// The result lives in a `(d1+d2−1) × (d1+d2−1)` box, which holds every total
/// photon number the input can carry, so nothing is truncated by construction.
pub fn transform_two_mode<T: Real>(
    input: &TwoModeState<T>,
    bs: &BeamSplitterParams<T>,
) -> Result<(TwoModeState<T>, T)> {
    let t = bs.t();
    let r = bs.r();
    if t.norm() <= T::epsilon() * T::lit(16.0) {
        return Err(Error::invalid("factored transform needs T != 0"));
    }
    let (d1, d2) = input.dims();
    let d = d1 + d2 - 1;
    let boxed = input.resized(d, d);
    let one = Complex::new(T::one(), T::zero());
    let s1 = number_phase(&boxed, one, t.inv());
    let s2 = exp_hop(&s1, r, true);
    let s3 = exp_hop(&s2, -r.conj(), false);
    let out = number_phase(&s3, t, one);
    let n_in = input.norm_sqr();
    let leakage = (T::one() - out.norm_sqr() / n_in).abs();
    let budget = leakage_budget::<T>();
    if leakage > budget {
        return Err(Error::Leakage {
            leakage: leakage.to_f64().unwrap_or(f64::NAN),
            budget: budget.to_f64().unwrap_or(LEAKAGE_BUDGET),
        });
    }
    Ok((out, leakage))
}

/// Projects mode 2 onto `|m⟩`; `n` is the Fock number fed into mode 2 and is
/// only recorded for bookkeeping.
pub fn condition_on_count<T: Real>(out: &TwoModeState<T>, n: usize, m: usize) -> Result<ConditionalOutcome<T>> {
    let (_, d2) = out.dims();
    if m >= d2 {
        return Err(Error::invalid(format!("detected count {m} outside mode-2 box {d2}")));
    }
    let raw = out.project_second(m);
    let probability = raw.norm_sqr();
    if !(probability.to_f64().unwrap_or(0.0) >= UNREACHABLE_PROBABILITY) {
        return Err(Error::Unreachable { probability: probability.to_f64().unwrap_or(0.0) });
    }
    Ok(ConditionalOutcome { state: raw.normalize()?, probability, indices: ConditionalIndices::new(n, m) })
}

/// Full beam-splitter output for `|Φ⟩ ⊗ |n⟩`.
pub fn transform_with_fock<T: Real>(
    input: &FockVector<T>,
    n: usize,
    bs: &BeamSplitterParams<T>,
) -> Result<TwoModeState<T>> {
    let state = TwoModeState::product(input, &FockVector::basis(n + 1, n));
    transform_two_mode(&state, bs).map(|(s, _)| s)
}

/// Conditional state and probability for `|Φ⟩ ⊗ |n⟩` with `m` detected photons.
pub fn conditional_oracle<T: Real>(
    input: &FockVector<T>,
    n: usize,
    m: usize,
    bs: &BeamSplitterParams<T>,
) -> Result<ConditionalOutcome<T>> {
    let out = transform_with_fock(input, n, bs)?;
    condition_on_count(&out, n, m)
}

/// `P(n, m)` for `m = 0 ..= m_max` from the oracle; unreachable outcomes give 0.
pub fn probability_map<T: Real>(
    input: &FockVector<T>,
    n: usize,
    bs: &BeamSplitterParams<T>,
    m_max: usize,
) -> Result<Vec<T>> {
    let input = input.normalize()?;
    let out = transform_with_fock(&input, n, bs)?;
    let d2 = out.dims().1;
    Ok((0..=m_max).into_par_iter().map(|m| if m < d2 { out.project_second(m).norm_sqr() } else { T::zero() }).collect())
}

/// `P(n, m)` evaluated term by term from the double sum over `(j, k)` and the
/// input photon-number distribution `dist[q] = ⟨q|ρ̂|q⟩`.
pub fn probability_direct<T: Real>(dist: &[T], n: usize, m: usize, bs: &BeamSplitterParams<T>) -> T {
    let idx = ConditionalIndices::new(n, m);
    let nu = idx.nu();
    let mu = idx.mu();
    let t2 = bs.transmittance();
    let r2 = bs.reflectance();
    let ln_t2 = t2.ln();
    let ln_pref = log_factorial::<T>(n) - log_factorial::<T>(m);
    let mut total = T::zero();
    for j in mu..=n {
        for k in mu..=n {
            // |R|^{2(j+k−ν)} combines (−|R|²)^{j+k} with |R|^{−2ν}
            let r_pow = r2.powi((j as i64 + k as i64 - nu) as i32);
            let sign = if (j + k) % 2 == 0 { T::one() } else { -T::one() };
            let cj = binomial::<T>(m, (j as i64 - nu) as usize);
            let ck = binomial::<T>(m, (k as i64 - nu) as usize);
            let outer = sign * r_pow * cj * ck;
            if outer == T::zero() {
                continue;
            }
            let mut inner = T::zero();
            for (q, &p) in dist.iter().enumerate().skip(idx.delta()) {
                if p == T::zero() {
                    continue;
                }
                let qn = (q as i64 + nu) as usize;
                let ln_term = ln_pref + T::from_f64(q as f64 - m as f64).unwrap() * ln_t2 + log_factorial::<T>(q)
                    - log_factorial::<T>(qn)
                    + crate::numerics::ln_binomial::<T>(q + j, j)
                    + crate::numerics::ln_binomial::<T>(q + k, k);
                inner += ln_term.exp() * p;
            }
            total += outer * inner;
        }
    }
    total
}

/// Dense reference `V† = e^{i(φ_T+φ_R)L̂₃} e^{θ(â₁†â₂ − â₂†â₁)} e^{i(φ_T−φ_R)L̂₃}`
/// on a `d × d` product box, by matrix exponentiation. Exact on the subspace of
/// total photon number below `d`.
pub fn dense_transform_matrix(bs: &BeamSplitterParams<f64>, d: usize) -> DMatrix<Complex64> {
    let size = d * d;
    let idx = |k1: usize, k2: usize| k1 * d + k2;
    let mut gen = DMatrix::<Complex64>::zeros(size, size);
    for k1 in 0..d {
        for k2 in 0..d {
            // a1† a2 |k1,k2⟩
            if k2 > 0 && k1 + 1 < d {
                let c = ((k1 + 1) as f64 * k2 as f64).sqrt();
                gen[(idx(k1 + 1, k2 - 1), idx(k1, k2))] += Complex64::new(bs.theta * c, 0.0);
            }
            // a2† a1 |k1,k2⟩
            if k1 > 0 && k2 + 1 < d {
                let c = (k1 as f64 * (k2 + 1) as f64).sqrt();
                gen[(idx(k1 - 1, k2 + 1), idx(k1, k2))] -= Complex64::new(bs.theta * c, 0.0);
            }
        }
    }
    let rot = gen.exp();
    let l3 = |phase: f64| {
        DMatrix::<Complex64>::from_fn(size, size, |i, j| {
            if i == j {
                let (k1, k2) = (i / d, i % d);
                Complex64::from_polar(1.0, phase * (k1 as f64 - k2 as f64) / 2.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    l3(bs.phi_t + bs.phi_r) * rot * l3(bs.phi_t - bs.phi_r)
}

/// Applies [`dense_transform_matrix`] to a two-mode state boxed to `(d, d)`.
pub fn dense_transform(input: &TwoModeState<f64>, bs: &BeamSplitterParams<f64>, d: usize) -> TwoModeState<f64> {
    let boxed = input.resized(d, d);
    let v = nalgebra::DVector::from_column_slice(boxed.amps());
    let w = dense_transform_matrix(bs, d) * v;
    TwoModeState::from_amps(d, d, w.as_slice().to_vec()).expect("box size")
}
