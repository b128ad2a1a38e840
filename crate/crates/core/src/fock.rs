//! Single-mode truncated Fock-space states and ladder operators.

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::log_factorial;
use crate::scalar::{cpowu, Real};

/// Default threshold on the probability mass a truncation may discard.
pub const TAIL_THRESHOLD: f64 = 1e-12;

/// [`TAIL_THRESHOLD`], raised to a few ulps of one for low-precision scalars.
pub fn tail_threshold<T: Real>() -> T {
    T::lit(TAIL_THRESHOLD).max(T::epsilon() * T::lit(16.0))
}

/// Complex amplitudes over `|0⟩ … |dim−1⟩`.
///
/// `normalized` records whether the vector was produced by a normalizing
/// operation; ladder operators return unnormalized vectors so that their
/// norms remain available to callers.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T: Real = f64> {
    amps: Vec<Complex<T>>,
    normalized: bool,
}

impl<T: Real> FockVector<T> {
    pub fn new(amps: Vec<Complex<T>>) -> Self {
        assert!(!amps.is_empty(), "Fock vector needs at least one amplitude");
        Self { amps, normalized: false }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![Complex::new(T::zero(), T::zero()); dim.max(1)])
    }

    /// Number state `|k⟩` in a basis of size `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} outside dim {dim}");
        let mut v = Self::zeros(dim);
        v.amps[k] = Complex::new(T::one(), T::zero());
        v.normalized = true;
        v
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> Complex<T>) -> Self {
        Self::new((0..dim.max(1)).map(f).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amps(&self) -> &[Complex<T>] {
        &self.amps
    }

    #[inline]
    pub fn amp(&self, k: usize) -> Complex<T> {
        self.amps.get(k).copied().unwrap_or_else(Complex::default)
    }

    pub fn into_amps(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the unit vector together with the squared norm it was divided by.
    pub fn normalized_with_norm(&self) -> Result<(Self, T)> {
        let n2 = self.norm_sqr();
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(Error::Annihilated);
        }
        let s = T::one() / n2.sqrt();
        let amps = self.amps.iter().map(|a| a * s).collect();
        Ok((Self { amps, normalized: true }, n2))
    }

    pub fn normalize(&self) -> Result<Self> {
        self.normalized_with_norm().map(|(v, _)| v)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { amps: self.amps.iter().map(|a| a * c).collect(), normalized: false }
    }

    /// `⟨self|other⟩`; a shorter vector is treated as zero-padded.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps.iter().zip(&other.amps).fold(Complex::default(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
    pub fn fidelity(&self, other: &Self) -> T {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom <= T::zero() {
            return T::zero();
        }
        self.inner(other).norm_sqr() / denom
    }

    /// Zero-pads (or truncates) to `dim`.
    pub fn resized(&self, dim: usize) -> Self {
        let mut amps = self.amps.clone();
        amps.resize(dim.max(1), Complex::default());
        let normalized = self.normalized && dim >= self.dim();
        Self { amps, normalized }
    }

    /// `|amps[dim−1]|²` relative to the total norm.
    pub fn edge_mass(&self) -> T {
        self.tail_mass(1)
    }

    /// Fraction of the norm carried by the top `width` basis states.
    pub fn tail_mass(&self, width: usize) -> T {
        let total = self.norm_sqr();
        if total <= T::zero() {
            return T::zero();
        }
        let start = self.dim().saturating_sub(width);
        self.amps[start..].iter().map(|a| a.norm_sqr()).sum::<T>() / total
    }

    /// Photon-number distribution `|c_k|²/‖c‖²`.
    pub fn distribution(&self) -> Vec<T> {
        let total = self.norm_sqr();
        self.amps.iter().map(|a| a.norm_sqr() / total).collect()
    }

    /// `Σ k^p |c_k|² / ‖c‖²`.
    pub fn number_moment(&self, p: i32) -> T {
        let total = self.norm_sqr();
        self.amps.iter().enumerate().map(|(k, a)| T::from_usize_exact(k).powi(p) * a.norm_sqr()).sum::<T>() / total
    }

    pub fn mean_photon_number(&self) -> T {
        self.number_moment(1)
    }

    /// Number operator variance.
    pub fn photon_number_variance(&self) -> T {
        let m = self.mean_photon_number();
        self.number_moment(2) - m * m
    }

    /// Highest index carrying nonzero amplitude.
    pub fn support_top(&self) -> Option<usize> {
        self.amps.iter().rposition(|a| a.norm_sqr() > T::zero())
    }

    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: DeserializeOwned,
    {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct FockRepr<T> {
    dim: usize,
    amps: Vec<[T; 2]>,
    normalized: bool,
}

impl<T: Real + Serialize> Serialize for FockVector<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FockRepr {
            dim: self.dim(),
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
            normalized: self.normalized,
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for FockVector<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FockRepr::<T>::deserialize(d)?;
        if repr.dim != repr.amps.len() || repr.dim == 0 {
            return Err(serde::de::Error::custom(format!(
                "dim {} does not match {} amplitudes",
                repr.dim,
                repr.amps.len()
            )));
        }
        Ok(Self {
            amps: repr.amps.into_iter().map(|[re, im]| Complex::new(re, im)).collect(),
            normalized: repr.normalized,
        })
    }
}

/// Coherent amplitude `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams<T: Real = f64> {
    pub beta: Complex<T>,
}

impl<T: Real> CoherentParams<T> {
    pub fn new(beta: Complex<T>) -> Self {
        Self { beta }
    }

    pub fn polar(abs: T, phase: T) -> Self {
        Self { beta: Complex::from_polar(abs, phase) }
    }

    /// Amplitude after the transmission factor `T^{n̂}`: `β′ = Tβ`.
    pub fn attenuated(&self, t: Complex<T>) -> Self {
        Self { beta: self.beta * t }
    }
}

/// Squeeze parameter `ξ = |ξ| e^{iφ}` with derived `κ = −e^{iφ} tanh|ξ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams<T: Real = f64> {
    pub xi: Complex<T>,
}

impl<T: Real> SqueezeParams<T> {
    pub fn new(xi: Complex<T>) -> Self {
        Self { xi }
    }

    pub fn polar(r: T, phase: T) -> Self {
        Self { xi: Complex::from_polar(r, phase) }
    }

    pub fn r(&self) -> T {
        self.xi.norm()
    }

    pub fn phase(&self) -> T {
        if self.xi.norm_sqr() > T::zero() {
            self.xi.arg()
        } else {
            T::zero()
        }
    }

    pub fn kappa(&self) -> Complex<T> {
        -Complex::from_polar(self.r().tanh(), self.phase())
    }

    /// Inverts `κ = −e^{iφ} tanh|ξ|`; requires `|κ| < 1`.
    pub fn from_kappa(kappa: Complex<T>) -> Result<Self> {
        let k = kappa.norm();
        if !(k < T::one()) {
            return Err(Error::invalid(format!("|kappa| = {k} must be below 1")));
        }
        if k == T::zero() {
            return Ok(Self { xi: Complex::default() });
        }
        Ok(Self { xi: Complex::from_polar(k.atanh(), (-kappa).arg()) })
    }

    /// Squeeze seen after `T^{n̂}`: `κ′ = T²κ`.
    pub fn attenuated(&self, t: Complex<T>) -> Result<Self> {
        Self::from_kappa(t * t * self.kappa())
    }

    pub fn mean_photon_number(&self) -> T {
        let s = self.r().sinh();
        s * s
    }
}

/// Coherent state truncated to `dim`, renormalized; errors if the discarded
/// mass exceeds [`TAIL_THRESHOLD`].
pub fn coherent_state<T: Real>(p: &CoherentParams<T>, dim: usize) -> Result<FockVector<T>> {
    coherent_state_with_threshold(p, dim, tail_threshold()).map(|(v, _)| v)
}

/// As [`coherent_state`], also returning the discarded mass `1 − Σ_{k<dim} |c_k|²`.
pub fn coherent_state_with_threshold<T: Real>(
    p: &CoherentParams<T>,
    dim: usize,
    threshold: T,
) -> Result<(FockVector<T>, T)> {
    if dim == 0 {
        return Err(Error::invalid("dim must be at least 1"));
    }
    let abs = p.beta.norm();
    let raw = if abs == T::zero() {
        FockVector::basis(dim, 0).into_amps()
    } else {
        let ln_abs = abs.ln();
        let phase = p.beta.arg();
        let half = T::lit(0.5);
        (0..dim)
            .map(|k| {
                let kf = T::from_usize_exact(k);
                let ln_mag = -half * abs * abs + kf * ln_abs - half * log_factorial::<T>(k);
                Complex::from_polar(ln_mag.exp(), kf * phase)
            })
            .collect()
    };
    finish_truncated(raw, dim, threshold)
}

/// Squeezed vacuum `S(ξ)|0⟩` truncated to `dim` (≥ 2), renormalized.
pub fn squeezed_vacuum<T: Real>(p: &SqueezeParams<T>, dim: usize) -> Result<FockVector<T>> {
    squeezed_vacuum_with_threshold(p, dim, tail_threshold()).map(|(v, _)| v)
}

pub fn squeezed_vacuum_with_threshold<T: Real>(
    p: &SqueezeParams<T>,
    dim: usize,
    threshold: T,
) -> Result<(FockVector<T>, T)> {
    if dim < 2 {
        return Err(Error::invalid("squeezed vacuum needs dim >= 2"));
    }
    let kappa = p.kappa();
    let kabs = kappa.norm();
    let mut raw = vec![Complex::default(); dim];
    if kabs == T::zero() {
        raw[0] = Complex::new(T::one(), T::zero());
    } else {
        let quarter = T::lit(0.25);
        let half = T::lit(0.5);
        let pref = quarter * (T::one() - kabs * kabs).ln();
        let (ln_k, phase) = (kabs.ln(), kappa.arg());
        for k in 0..dim.div_ceil(2) {
            let kf = T::from_usize_exact(k);
            let ln_mag = pref + half * log_factorial::<T>(2 * k) - kf * T::LN_2() - log_factorial::<T>(k) + kf * ln_k;
            raw[2 * k] = Complex::from_polar(ln_mag.exp(), kf * phase);
        }
    }
    finish_truncated(raw, dim, threshold)
}

fn finish_truncated<T: Real>(raw: Vec<Complex<T>>, dim: usize, threshold: T) -> Result<(FockVector<T>, T)> {
    let kept: T = raw.iter().map(|a| a.norm_sqr()).sum();
    let lost = (T::one() - kept).max(T::zero());
    if lost > threshold {
        return Err(Error::TruncationInadequate {
            tail: lost.to_f64().unwrap_or(f64::NAN),
            threshold: threshold.to_f64().unwrap_or(f64::NAN),
            dim,
        });
    }
    let v = FockVector::new(raw).normalize()?;
    Ok((v, lost))
}

/// `ln √((k+t)!/k!)`.
#[inline]
fn ln_ladder<T: Real>(k: usize, t: usize) -> T {
    T::lit(0.5) * (log_factorial::<T>(k + t) - log_factorial::<T>(k))
}

/// `(â†)^times v` in the same basis size. Errors if more than
/// [`TAIL_THRESHOLD`] of the resulting weight would be pushed past the edge.
pub fn apply_creation<T: Real>(v: &FockVector<T>, times: usize) -> Result<FockVector<T>> {
    let dim = v.dim();
    let grown = apply_creation_growing(v, times);
    let total = grown.norm_sqr();
    let lost: T = grown.amps()[dim..].iter().map(|a| a.norm_sqr()).sum();
    if total > T::zero() && lost > tail_threshold::<T>() * total {
        return Err(Error::TruncationOverflow { lost: (lost / total).to_f64().unwrap_or(f64::NAN), dim });
    }
    let mut amps = grown.into_amps();
    amps.truncate(dim);
    Ok(FockVector::new(amps))
}

/// `(â†)^times v` with the basis enlarged by `times`, so nothing is lost.
pub fn apply_creation_growing<T: Real>(v: &FockVector<T>, times: usize) -> FockVector<T> {
    let mut amps = vec![Complex::default(); v.dim() + times];
    for (k, a) in v.amps().iter().enumerate() {
        amps[k + times] = a * ln_ladder::<T>(k, times).exp();
    }
    FockVector::new(amps)
}

/// `â^times v`; errors when the whole support is annihilated.
pub fn apply_annihilation<T: Real>(v: &FockVector<T>, times: usize) -> Result<FockVector<T>> {
    let dim = v.dim();
    let mut amps = vec![Complex::default(); dim];
    for k in 0..dim.saturating_sub(times) {
        amps[k] = v.amps()[k + times] * ln_ladder::<T>(k, times).exp();
    }
    let out = FockVector::new(amps);
    if out.norm_sqr() == T::zero() {
        return Err(Error::Annihilated);
    }
    Ok(out)
}

/// `T^{n̂} v` without normalization.
pub fn attenuate_unnormalized<T: Real>(v: &FockVector<T>, t: Complex<T>) -> FockVector<T> {
    let amps = v.amps().iter().enumerate().map(|(k, a)| a * cpowu(t, k)).collect();
    FockVector::new(amps)
}

/// `T^{n̂} v`, normalized.
pub fn attenuate<T: Real>(v: &FockVector<T>, t: Complex<T>) -> Result<FockVector<T>> {
    if t.norm() > T::one() + T::lit(1e-12) {
        return Err(Error::invalid("|T| must not exceed 1"));
    }
    attenuate_unnormalized(v, t).normalize()
}

/// Smallest basis size with `dim ≥ mean + 10√mean + n + m + 10` for which
/// `tail(dim)` drops below [`TAIL_THRESHOLD`], plus `n + m + 10` states of
/// headroom: conditioning reweights the high-number components by ladder
/// factors, and the discarded mass `1 − Σ|c_k|²` cannot resolve a tighter
/// threshold in double precision.
pub fn adaptive_dim(mean: f64, n: usize, m: usize, mut tail: impl FnMut(usize) -> f64) -> usize {
    let floor = mean + 10.0 * mean.max(0.0).sqrt() + (n + m) as f64 + 10.0;
    let mut dim = floor.ceil() as usize;
    while tail(dim) >= TAIL_THRESHOLD {
        dim += (dim / 8).max(4);
        if dim > 1 << 16 {
            break;
        }
    }
    dim + n + m + 10
}

/// Adaptive dimension for a coherent input with conditioning counts `(n, m)`.
pub fn coherent_dim(beta: Complex<f64>, n: usize, m: usize) -> usize {
    let p = CoherentParams::new(beta);
    adaptive_dim(beta.norm_sqr(), n, m, |d| {
        coherent_state_with_threshold(&p, d, f64::INFINITY).map(|(_, t)| t).unwrap_or(1.0)
    })
}

/// Adaptive dimension for a squeezed-vacuum input with conditioning counts `(n, m)`.
pub fn squeezed_dim(p: &SqueezeParams<f64>, n: usize, m: usize) -> usize {
    adaptive_dim(p.mean_photon_number(), n, m, |d| {
        squeezed_vacuum_with_threshold(p, d, f64::INFINITY).map(|(_, t)| t).unwrap_or(1.0)
    })
}
