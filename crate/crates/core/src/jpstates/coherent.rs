//! Closed forms for coherent inputs `|Φ⟩ = |β⟩`, with `β′ = Tβ`.

use num_complex::Complex64;

use super::Prepared;
use crate::beamsplitter::{BeamSplitterParams, ConditionalIndices};
use crate::error::{Error, Result};
use crate::fock::{coherent_dim, CoherentParams, FockVector};
use crate::numerics::{binomial, laguerre, log_factorial};
use crate::scalar::cpowu;

/// Truncation tolerance on the discarded fraction of `N′`.
const NORM_TAIL: f64 = 1e-10;

/// `χ⁽¹⁾_{l′,l}(α) = ⟨α|â^{l′}(â†)^{l}|α⟩`.
pub fn chi1(l_prime: usize, l: usize, alpha: Complex64) -> Complex64 {
    let x = alpha.norm_sqr();
    if l_prime >= l {
        let d = l_prime - l;
        cpowu(alpha, d) * (log_factorial::<f64>(l).exp() * laguerre::<f64, f64>(l, d as f64, -x))
    } else {
        let d = l - l_prime;
        cpowu(alpha.conj(), d) * (log_factorial::<f64>(l_prime).exp() * laguerre::<f64, f64>(l_prime, d as f64, -x))
    }
}

/// `a_l = Σ_{k=l}^{n} (−|R|²)^k C(n,k) C(k,l)`, the weight of `(β′â†)^l` once the
/// sum over `k` is carried out.
pub(crate) fn ladder_weights(n: usize, r2: f64) -> Vec<f64> {
    (0..=n)
        .map(|l| (l..=n).map(|k| (-r2).powi(k as i32) * binomial::<f64>(n, k) * binomial::<f64>(k, l)).sum())
        .collect()
}

/// Basis size adequate for a coherent input conditioned on `(n, m)`.
pub fn coherent_dim_for(beta: &CoherentParams<f64>, idx: ConditionalIndices) -> usize {
    coherent_dim(beta.beta, idx.n, idx.m) + idx.n
}

/// `N′_{n,m}` from the double sum over `χ⁽¹⁾`, with the `|β′|^{−2ν}` prefactor
/// absorbed into the powers of `β′` so that it stays finite at `β′ = 0`.
pub fn normalization_chi1(beta_p: Complex64, idx: ConditionalIndices, bs: &BeamSplitterParams<f64>) -> f64 {
    let nu = idx.nu();
    let a = ladder_weights(idx.n, bs.reflectance());
    let mut total = Complex64::new(0.0, 0.0);
    for l in idx.mu()..=idx.n {
        let ln = (l as i64 - nu) as usize;
        for lp in idx.mu()..=idx.n {
            let lpn = (lp as i64 - nu) as usize;
            let w = a[l] * a[lp] / (log_factorial::<f64>(ln) + log_factorial::<f64>(lpn)).exp();
            total += cpowu(beta_p, ln) * cpowu(beta_p.conj(), lpn) * chi1(lp, l, beta_p) * w;
        }
    }
    total.re
}

/// Fock amplitudes of the PSJP/PAJP coherent state from the triple sum
/// `Σ_k (−|R|²)^k C(n,k) Σ_l C(k,l) β′^{l−ν}/(l−ν)! Σ_p β′^p/p! √((p+l)!) |p+l⟩`,
/// times `e^{−|β′|²/2}`. Normalized by `N′` from [`normalization_chi1`];
/// errors if the truncation discards more than `1e-10` of `N′`.
pub fn psjp_pajp_coherent(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    dim: usize,
) -> Result<Prepared<f64>> {
    let bp = beta.attenuated(bs.t()).beta;
    let raw = coherent_vector(bp, idx, bs, dim);
    let nprime = normalization_chi1(bp, idx, bs);
    finish(raw, nprime, dim)
}

pub(crate) fn coherent_vector(
    bp: Complex64,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    dim: usize,
) -> FockVector<f64> {
    let nu = idx.nu();
    let a = ladder_weights(idx.n, bs.reflectance());
    let x = bp.norm_sqr();
    let (abs_ln, ph) = (bp.norm().ln(), bp.arg());
    FockVector::from_fn(dim, |q| {
        // every term carries β′^{q−ν}; q − ν ≥ 0 whenever some l ≤ q with l ≥ μ exists
        if (q as i64) < nu || q < idx.mu() {
            return Complex64::new(0.0, 0.0);
        }
        let e = (q as i64 - nu) as usize;
        let mut acc = 0.0;
        for l in idx.mu()..=idx.n.min(q) {
            let ln = (l as i64 - nu) as usize;
            let ln_mag = 0.5 * log_factorial::<f64>(q) - log_factorial::<f64>(ln) - log_factorial::<f64>(q - l)
                + if e == 0 { 0.0 } else { e as f64 * abs_ln }
                - 0.5 * x;
            acc += a[l] * ln_mag.exp();
        }
        if e > 0 && x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(acc, e as f64 * ph)
    })
}

fn finish(raw: FockVector<f64>, nprime: f64, dim: usize) -> Result<Prepared<f64>> {
    let kept = raw.norm_sqr();
    if !(nprime > 0.0) {
        return Err(Error::Annihilated);
    }
    let lost = 1.0 - kept / nprime;
    if lost > NORM_TAIL {
        return Err(Error::TruncationInadequate { tail: lost, threshold: NORM_TAIL, dim });
    }
    let state = raw.normalize()?;
    Ok(Prepared { state, normalization: nprime })
}

/// The compact Laguerre form
/// `|T|^{2n} n! (−|R|²/|T|²)^μ / (β′^ν (n+δ)!) · L_{n−μ}^{|ν|}((|R|²/|T|²) β′ â†) (β′â†)^μ |β′⟩`
/// expanded in the Fock basis. Requires `T ≠ 0` and, for `ν > 0`, `β′ ≠ 0`.
pub fn psjp_pajp_coherent_laguerre(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    dim: usize,
) -> Result<FockVector<f64>> {
    let t2 = bs.transmittance();
    let r2 = bs.reflectance();
    if t2 == 0.0 {
        return Err(Error::invalid("Laguerre form needs T != 0"));
    }
    let bp = beta.attenuated(bs.t()).beta;
    let nu = idx.nu();
    if nu > 0 && bp.norm_sqr() == 0.0 {
        return Err(Error::invalid("Laguerre form singular at beta' = 0 for added photons"));
    }
    let (n, mu, abs_nu) = (idx.n, idx.mu(), idx.abs_nu());
    let deg = n - mu;
    let gamma = bp * (r2 / t2);
    // L_deg^{|ν|}(y) = Σ_s (−1)^s C(deg+|ν|, deg−s) y^s / s!
    let coeffs: Vec<Complex64> = (0..=deg)
        .map(|s| {
            let c = binomial::<f64>(deg + abs_nu, deg - s) / log_factorial::<f64>(s).exp();
            cpowu(gamma, s) * if s % 2 == 0 { c } else { -c }
        })
        .collect();
    let pref = Complex64::new(
        t2.powi(n as i32) * log_factorial::<f64>(n).exp() * (-r2 / t2).powi(mu as i32)
            / log_factorial::<f64>(n + idx.delta()).exp(),
        0.0,
    ) * cpowu(bp, mu)
        * if nu >= 0 { cpowu(bp, nu as usize).inv() } else { cpowu(bp, (-nu) as usize) };
    let x = bp.norm_sqr();
    Ok(FockVector::from_fn(dim, |q| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, c) in coeffs.iter().enumerate() {
            let j = s + mu;
            if j > q {
                break;
            }
            // (â†)^j |β′⟩ at |q⟩: e^{−|β′|²/2} β′^{q−j} √(q!)/(q−j)!
            let mag = (0.5 * log_factorial::<f64>(q) - log_factorial::<f64>(q - j) - 0.5 * x).exp();
            acc += c * cpowu(bp, q - j) * mag;
        }
        acc * pref
    }))
}
