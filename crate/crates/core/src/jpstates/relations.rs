//! State families related to the conditional states: photon-added coherent
//! states as displaced Fock superpositions, crescent states, squeezed Fock
//! superpositions and squeezed-state excitations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernels::{displace, squeeze};
use super::Prepared;
use crate::error::{Error, Result};
use crate::fock::{
    apply_annihilation, apply_creation_growing, coherent_state, squeezed_dim, squeezed_vacuum, CoherentParams,
    FockVector, SqueezeParams,
};
use crate::numerics::{binomial, log_factorial};
use crate::scalar::cpowu;

/// `(â†)^n|β⟩` from `Σ_k C(n,k) √(k!) (β*)^{n−k} D̂(β)|k⟩`, in `dim` basis states.
pub fn photon_added_coherent_displacedfock(beta: Complex64, n: usize, dim: usize) -> Result<Prepared<f64>> {
    let coeffs = FockVector::from_fn(n + 1, |k| {
        cpowu(beta.conj(), n - k) * (binomial::<f64>(n, k) * (0.5 * log_factorial::<f64>(k)).exp())
    });
    Prepared::from_raw(displace(beta, &coeffs, dim)?)
}

/// Crescent state `D̂(−β)(â†)^n|2β⟩`, in `dim` basis states.
pub fn near_photon_number_state(beta: Complex64, n: usize, dim: usize) -> Result<Prepared<f64>> {
    let work = dim + n;
    let seed = coherent_state(&CoherentParams::new(beta * 2.0), work)?;
    let added = apply_creation_growing(&seed, n);
    Prepared::from_raw(displace(-beta, &added, dim)?)
}

/// One normally ordered term `coeff · (â†)^creation â^annihilation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalOrderTerm {
    pub creation: usize,
    pub annihilation: usize,
    pub coeff: Complex64,
}

/// Normally ordered expansion of `(â† + εâ)^n`: the coefficient of
/// `(â†)^{l−2k} â^{n−l}` is `C(n,l) C(l,2k) (2k)!/(2^k k!) ε^{n−l+k}`.
pub fn normal_order_coeffs(n: usize, epsilon: Complex64) -> Vec<NormalOrderTerm> {
    let mut terms = Vec::new();
    for l in (0..=n).rev() {
        for k in 0..=l / 2 {
            let pair =
                (log_factorial::<f64>(2 * k) - k as f64 * std::f64::consts::LN_2 - log_factorial::<f64>(k)).exp();
            let c = binomial::<f64>(n, l) * binomial::<f64>(l, 2 * k) * pair;
            terms.push(NormalOrderTerm {
                creation: l - 2 * k,
                annihilation: n - l,
                coeff: cpowu(epsilon, n - l + k) * c,
            });
        }
    }
    terms
}

/// Applies a normally ordered operator to `v`, enlarging the basis as needed.
pub fn apply_normal_ordered(terms: &[NormalOrderTerm], v: &FockVector<f64>) -> FockVector<f64> {
    let grow = terms.iter().map(|t| t.creation).max().unwrap_or(0);
    let mut acc = vec![Complex64::new(0.0, 0.0); v.dim() + grow];
    for t in terms {
        let lowered = match apply_annihilation(v, t.annihilation) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let raised = apply_creation_growing(&lowered, t.creation);
        for (k, a) in raised.amps().iter().enumerate() {
            acc[k] += a * t.coeff;
        }
    }
    FockVector::new(acc)
}

/// Whether photons are added to or subtracted from `Ŝ(ξ)|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqueezedLadder {
    Added,
    Subtracted,
}

/// `Σ_j w_j Ŝ(ξ)|index_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedDecomposition {
    pub xi: SqueezeParams<f64>,
    pub terms: Vec<(usize, Complex64)>,
}

impl SqueezedDecomposition {
    /// The superposition in `dim` basis states (not normalized).
    pub fn reconstruct(&self, dim: usize) -> Result<FockVector<f64>> {
        let top = self.terms.iter().map(|t| t.0).max().unwrap_or(0);
        let coeffs = FockVector::from_fn(top + 1, |k| self.terms.iter().filter(|t| t.0 == k).map(|t| t.1).sum());
        squeeze(&self.xi, &coeffs, dim)
    }
}

/// Weights of `(â†)^n Ŝ(ξ)|0⟩` or `â^n Ŝ(ξ)|0⟩` over squeezed Fock states
/// `Ŝ(ξ)|n−2k⟩`:
/// added: `(1−|κ|²)^{−n/2} n! κ*^k / (2^k k! √((n−2k)!))`;
/// subtracted: `κ^n (1−|κ|²)^{−n/2} n! κ^{−k} / (2^k k! √((n−2k)!))`.
pub fn squeezed_decomposition(
    xi: &SqueezeParams<f64>,
    count: usize,
    mode: SqueezedLadder,
) -> Result<SqueezedDecomposition> {
    let kappa = xi.kappa();
    let n = count;
    let (pref, eps) = match mode {
        SqueezedLadder::Added => (Complex64::new((1.0 - kappa.norm_sqr()).powf(-(n as f64) / 2.0), 0.0), kappa.conj()),
        SqueezedLadder::Subtracted => {
            if kappa.norm() == 0.0 {
                return Err(Error::invalid("photon subtraction from the vacuum (kappa = 0)"));
            }
            (cpowu(kappa, n) * (1.0 - kappa.norm_sqr()).powf(-(n as f64) / 2.0), kappa.inv())
        }
    };
    let terms = (0..=n / 2)
        .map(|k| {
            let ln_mag = log_factorial::<f64>(n)
                - k as f64 * std::f64::consts::LN_2
                - log_factorial::<f64>(k)
                - 0.5 * log_factorial::<f64>(n - 2 * k);
            (n - 2 * k, pref * cpowu(eps, k) * ln_mag.exp())
        })
        .collect();
    Ok(SqueezedDecomposition { xi: *xi, terms })
}

fn working_dim(xi: &SqueezeParams<f64>, n: usize, dim: usize) -> usize {
    dim.max(squeezed_dim(xi, n, 0))
}

/// `D̂(β) Ŝ†(ξ) (â†)^n Ŝ(2ξ)|0⟩`, normalized, in `dim` basis states.
/// `Ŝ(2ξ)` doubles `|ξ|` at fixed phase.
pub fn squeezed_state_excitation(
    beta: Complex64,
    xi: &SqueezeParams<f64>,
    n: usize,
    dim: usize,
) -> Result<Prepared<f64>> {
    let doubled = SqueezeParams::new(xi.xi * 2.0);
    let work = working_dim(&doubled, n, dim);
    let seed = squeezed_vacuum(&doubled, work)?;
    let added = apply_creation_growing(&seed, n);
    let unsqueezed = squeeze(&SqueezeParams::new(-xi.xi), &added, 2 * (work + n) + 40)?;
    Prepared::from_raw(displace(beta, &unsqueezed, dim)?)
}

/// `D̂(β) (â† + κ*â)^n Ŝ(ξ)|0⟩`, normalized, in `dim` basis states.
pub fn squeezed_state_excitation_direct(
    beta: Complex64,
    xi: &SqueezeParams<f64>,
    n: usize,
    dim: usize,
) -> Result<Prepared<f64>> {
    let work = working_dim(xi, n, dim);
    let seed = squeezed_vacuum(xi, work)?;
    let v = apply_normal_ordered(&normal_order_coeffs(n, xi.kappa().conj()), &seed);
    Prepared::from_raw(displace(beta, &v, dim)?)
}
