//! Conditional output states of the beam-splitter scheme.
//!
//! [`jp_state_general`] evaluates the finite operator sum for an arbitrary
//! input vector; [`jp_state_jacobi_form`] the equivalent Jacobi-polynomial
//! form. The submodules provide closed forms for coherent and squeezed-vacuum
//! inputs and the related state families (displaced Fock, crescent, squeezed
//! Fock, squeezed-state excitations).

pub mod coherent;
pub mod kernels;
pub mod relations;
pub mod squeezed;

use num_complex::Complex;

use crate::beamsplitter::{BeamSplitterParams, ConditionalIndices};
use crate::error::Result;
use crate::fock::{attenuate_unnormalized, FockVector};
use crate::numerics::{jacobi, ln_binomial, log_factorial};
use crate::scalar::{cpowu, Real};

pub use coherent::{chi1, coherent_dim_for, psjp_pajp_coherent, psjp_pajp_coherent_laguerre};
pub use relations::{
    near_photon_number_state, normal_order_coeffs, photon_added_coherent_displacedfock, squeezed_decomposition,
    squeezed_state_excitation, squeezed_state_excitation_direct, NormalOrderTerm, SqueezedDecomposition,
    SqueezedLadder,
};
pub use squeezed::{cat_split, psjp_pajp_squeezed, CatComponents};

/// A normalized state together with the squared norm of the unnormalized
/// vector it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared<T: Real = f64> {
    pub state: FockVector<T>,
    pub normalization: T,
}

impl<T: Real> Prepared<T> {
    pub(crate) fn from_raw(raw: FockVector<T>) -> Result<Self> {
        let (state, normalization) = raw.normalized_with_norm()?;
        Ok(Self { state, normalization })
    }
}

/// Unnormalized `Σ_{k=μ}^{n} (−|R|²)^k/(k−ν)! C(n,k) â^{k−ν}(â†)^k T^{n̂}|Φ⟩`,
/// in a basis of `input.dim() + n` states. Its squared norm is `N_{n,m}`.
pub fn jp_vector_general<T: Real>(
    input: &FockVector<T>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<T>,
) -> FockVector<T> {
    let nu = idx.nu();
    let (n, mu) = (idx.n, idx.mu());
    let r2 = bs.reflectance();
    let half = T::lit(0.5);
    let attenuated = attenuate_unnormalized(input, bs.t());
    let out_dim = input.dim() + n;
    let mut amps = vec![Complex::<T>::default(); out_dim];
    for (q, c) in attenuated.amps().iter().enumerate() {
        let target = q as i64 + nu;
        if target < 0 || c.norm_sqr() == T::zero() {
            continue;
        }
        let target = target as usize;
        // on |q⟩: â^{k−ν}(â†)^k|q⟩ = (q+k)!/√(q!(q+ν)!) |q+ν⟩
        let mut coeff = T::zero();
        for k in mu..=n {
            let k_nu = (k as i64 - nu) as usize;
            let ln_mag = log_factorial::<T>(q + k)
                - half * (log_factorial::<T>(q) + log_factorial::<T>(target))
                - log_factorial::<T>(k_nu)
                + ln_binomial::<T>(n, k);
            let term = ln_mag.exp() * r2.powi(k as i32);
            coeff += if k % 2 == 0 { term } else { -term };
        }
        amps[target] += c * coeff;
    }
    FockVector::new(amps)
}

/// Conditional state from the operator sum, normalized, with `N_{n,m}` attached.
pub fn jp_state_general<T: Real>(
    input: &FockVector<T>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<T>,
) -> Result<Prepared<T>> {
    Prepared::from_raw(jp_vector_general(input, idx, bs))
}

/// Coefficient of `|q⟩ → |q+ν⟩` in the Jacobi form, before the ladder factor:
/// `P_n^{(|ν|, q−m)}` for `ν < 0`, `P_m^{(ν, q−m)}` for `ν > 0`, `P_n^{(0, q−n)}` for `ν = 0`,
/// all at `2|T|² − 1`.
pub fn jacobi_weight<T: Real>(q: usize, idx: ConditionalIndices, t2: T) -> T {
    let z = T::lit(2.0) * t2 - T::one();
    let beta = T::from_f64(q as f64 - idx.m as f64).unwrap();
    let abs_nu = T::from_usize_exact(idx.abs_nu());
    match idx.nu().signum() {
        -1 => jacobi::<T, T>(idx.n, abs_nu, beta, z),
        1 => jacobi::<T, T>(idx.m, abs_nu, beta, z),
        _ => jacobi::<T, T>(idx.n, T::zero(), beta, z),
    }
}

/// Conditional state from the Jacobi-polynomial form: weight each `T^q c_q`
/// by [`jacobi_weight`] and then subtract `|ν|` photons (`ν < 0`) or add `ν`
/// photons (`ν > 0`). The attached normalization is the squared norm of that
/// unnormalized vector.
pub fn jp_state_jacobi_form<T: Real>(
    input: &FockVector<T>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<T>,
) -> Result<Prepared<T>> {
    let t = bs.t();
    let t2 = bs.transmittance();
    let nu = idx.nu();
    let out_dim = input.dim() + idx.n;
    let half = T::lit(0.5);
    let mut amps = vec![Complex::<T>::default(); out_dim];
    for (q, c) in input.amps().iter().enumerate() {
        let target = q as i64 + nu;
        if target < 0 || c.norm_sqr() == T::zero() {
            continue;
        }
        let target = target as usize;
        let ladder = (half * (log_factorial::<T>(q.max(target)) - log_factorial::<T>(q.min(target)))).exp();
        let w = jacobi_weight(q, idx, t2) * ladder;
        amps[target] = c * cpowu(t, q) * w;
    }
    Prepared::from_raw(FockVector::new(amps))
}

/// `F_l^μ(q, |ν|; T)` from its defining finite sum, on the basis state `|q⟩`.
pub fn appendix_f_sum<T: Real>(l: usize, mu: usize, abs_nu: usize, q: usize, bs: &BeamSplitterParams<T>) -> Complex<T> {
    let r2 = bs.reflectance();
    let mut acc = T::zero();
    for k in 0..=l {
        let ln_mag = log_factorial::<T>(k) - log_factorial::<T>(k + abs_nu)
            + ln_binomial::<T>(l, k)
            + ln_binomial::<T>(q + mu + k, k);
        let term = ln_mag.exp() * r2.powi(k as i32);
        acc += if k % 2 == 0 { term } else { -term };
    }
    cpowu(bs.t(), q) * acc
}

/// `l!/(l+|ν|)! P_l^{(|ν|, q+μ−|ν|−l)}(2|T|²−1) T^q`.
pub fn appendix_f_jacobi<T: Real>(
    l: usize,
    mu: usize,
    abs_nu: usize,
    q: usize,
    bs: &BeamSplitterParams<T>,
) -> Complex<T> {
    let z = T::lit(2.0) * bs.transmittance() - T::one();
    let beta = T::from_f64((q + mu) as f64 - abs_nu as f64 - l as f64).unwrap();
    let p = jacobi::<T, T>(l, T::from_usize_exact(abs_nu), beta, z);
    let pref = (log_factorial::<T>(l) - log_factorial::<T>(l + abs_nu)).exp();
    cpowu(bs.t(), q) * (pref * p)
}

/// `Σ_k |term_k|` of the finite sum in [`appendix_f_sum`]; the natural scale for
/// its rounding error, since the sum itself vanishes at some `q`.
pub fn appendix_f_scale(l: usize, mu: usize, abs_nu: usize, q: usize, b: &BeamSplitterParams<f64>) -> f64 {
    let r2 = b.reflectance();
    let t = b.transmittance().sqrt().powi(q as i32);
    (0..=l)
        .map(|k| {
            (log_factorial::<f64>(k) - log_factorial::<f64>(k + abs_nu)
                + ln_binomial::<f64>(l, k)
                + ln_binomial::<f64>(q + mu + k, k))
            .exp()
                * r2.powi(k as i32)
        })
        .sum::<f64>()
        * t
}
