//! Closed forms for squeezed-vacuum inputs `|Φ⟩ = Ŝ(ξ)|0⟩`, with `κ′ = T²κ`.

use num_complex::Complex64;

use super::Prepared;
use crate::beamsplitter::{BeamSplitterParams, ConditionalIndices};
use crate::error::{Error, Result};
use crate::fock::{tail_threshold, FockVector, SqueezeParams};
use crate::numerics::{ln_binomial, ln_gamma_half, log_factorial};

/// `Σ_k (−|R|²)^k/(k−ν)! C(n,k) (p−ν+k)! / (Γ((p−ν)/2+1) √(p!))`, the
/// `κ′`-independent part of the amplitude at `|p⟩` (requires `p ≥ ν`).
fn radial_weight(p: usize, idx: ConditionalIndices, r2: f64) -> f64 {
    let nu = idx.nu();
    let e = (p as i64 - nu) as usize;
    let base = -ln_gamma_half::<f64>(e) - 0.5 * log_factorial::<f64>(p);
    let mut acc = 0.0;
    for k in idx.mu()..=idx.n {
        let kn = (k as i64 - nu) as usize;
        let ln_mag = base + log_factorial::<f64>(e + k) - log_factorial::<f64>(kn) + ln_binomial::<f64>(idx.n, k);
        let term = r2.powi(k as i32) * ln_mag.exp();
        acc += if k % 2 == 0 { term } else { -term };
    }
    acc
}

/// `(±√(κ′/2))^{e}`, with `0^0 = 1`.
fn root_power(kappa_p: Complex64, e: usize, sign: f64) -> Complex64 {
    if e == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let abs = kappa_p.norm();
    if abs == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mag = (0.5 * e as f64 * (abs / 2.0).ln()).exp();
    let s = if e % 2 == 1 { sign } else { 1.0 };
    Complex64::from_polar(s * mag, 0.5 * e as f64 * kappa_p.arg())
}

fn check_edge(raw: &FockVector<f64>, dim: usize) -> Result<()> {
    let tail = raw.tail_mass(2);
    if tail > tail_threshold::<f64>() {
        return Err(Error::TruncationInadequate { tail, threshold: tail_threshold::<f64>(), dim });
    }
    Ok(())
}

/// Fock amplitudes of the PSJP/PAJP squeezed-vacuum state: only `p` with
/// `p − ν` even are populated. The attached normalization is `N′_{n,m}`, the
/// squared norm of the vector including the `(1−|κ′|²)^{1/4}` prefactor.
pub fn psjp_pajp_squeezed(
    xi: &SqueezeParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    dim: usize,
) -> Result<Prepared<f64>> {
    let kp = xi.attenuated(bs.t())?.kappa();
    let pref = (1.0 - kp.norm_sqr()).powf(0.25);
    let r2 = bs.reflectance();
    let nu = idx.nu();
    let raw = FockVector::from_fn(dim, |p| {
        if p < idx.mu() || (p as i64) < nu || (p as i64 - nu) % 2 != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let e = (p as i64 - nu) as usize;
        // (κ′/2)^{e/2} with e even
        root_power(kp, e, 1.0) * (pref * radial_weight(p, idx, r2))
    });
    check_edge(&raw, dim)?;
    Prepared::from_raw(raw)
}

/// The two cat components `|Ψ^{(±)}⟩` and their squared norms `N′^{(±)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatComponents {
    pub plus: FockVector<f64>,
    pub minus: FockVector<f64>,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// Set when `κ′ = 0`, where both components collapse onto `|ν⟩`.
    pub degenerate: bool,
}

impl CatComponents {
    /// Normalized `|Ψ^{(+)}⟩ + |Ψ^{(−)}⟩`.
    pub fn recombined(&self) -> Result<FockVector<f64>> {
        let amps = self.plus.amps().iter().zip(self.minus.amps()).map(|(a, b)| a + b).collect();
        FockVector::new(amps).normalize()
    }
}

/// Splits the squeezed PSJP/PAJP state into components with amplitudes
/// `C^{(±)}_{n,m,p}(κ′)`, which use `(±√(κ′/2))^{p−ν}` for every `p ≥ μ`.
pub fn cat_split(
    xi: &SqueezeParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    dim: usize,
) -> Result<CatComponents> {
    let kp = xi.attenuated(bs.t())?.kappa();
    let r2 = bs.reflectance();
    let nu = idx.nu();
    let build = |sign: f64| {
        FockVector::from_fn(dim, |p| {
            if p < idx.mu() || (p as i64) < nu {
                return Complex64::new(0.0, 0.0);
            }
            let e = (p as i64 - nu) as usize;
            root_power(kp, e, sign) * radial_weight(p, idx, r2)
        })
    };
    let (plus, minus) = (build(1.0), build(-1.0));
    check_edge(&plus, dim)?;
    let (plus, norm_plus) = plus.normalized_with_norm()?;
    let (minus, norm_minus) = minus.normalized_with_norm()?;
    Ok(CatComponents { plus, minus, norm_plus, norm_minus, degenerate: kp.norm() == 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::squeezed_vacuum;
    use crate::jpstates::jp_state_general;

    fn idx(n: usize, m: usize) -> ConditionalIndices {
        ConditionalIndices::new(n, m)
    }

    #[test]
    fn parity_selection() {
        let xi = SqueezeParams::polar(0.7, 0.4);
        let b = BeamSplitterParams::from_transmittance(0.6).unwrap();
        for n in 0..4 {
            for m in 0..4 {
                let s = psjp_pajp_squeezed(&xi, idx(n, m), &b, 120).unwrap();
                let nu = n as i64 - m as i64;
                for (p, a) in s.state.amps().iter().enumerate() {
                    if (p as i64 - nu) % 2 != 0 {
                        assert_eq!(*a, Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn matches_general_form_and_normalization() {
        let xi = SqueezeParams::polar(0.6, -0.8);
        let b = BeamSplitterParams::from_transmittance_phases(0.7, 0.4, 0.1).unwrap();
        let input = squeezed_vacuum(&xi, 120).unwrap();
        let kp = xi.attenuated(b.t()).unwrap().kappa();
        let ratio = ((1.0f64 - kp.norm_sqr()) / (1.0 - xi.kappa().norm_sqr())).sqrt();
        for n in 0..=4 {
            for m in 0..=4 {
                let cl = psjp_pajp_squeezed(&xi, idx(n, m), &b, 124).unwrap();
                let g = jp_state_general(&input, idx(n, m), &b).unwrap();
                assert!((cl.state.fidelity(&g.state) - 1.0).abs() < 1e-9, "n={n} m={m}");
                assert!((cl.normalization / (ratio * g.normalization) - 1.0).abs() < 1e-9, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn zero_zero_is_attenuated_squeezed_vacuum() {
        let xi = SqueezeParams::polar(0.5, 1.0);
        let b = BeamSplitterParams::from_transmittance_phases(0.8, 0.3, 0.0).unwrap();
        let s = psjp_pajp_squeezed(&xi, idx(0, 0), &b, 80).unwrap();
        let target = squeezed_vacuum(&xi.attenuated(b.t()).unwrap(), 80).unwrap();
        assert!((s.state.fidelity(&target) - 1.0).abs() < 1e-12);
        assert!((s.normalization - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_components_recombine() {
        let xi = SqueezeParams::polar(0.8, 0.3);
        let b = BeamSplitterParams::from_transmittance(0.7).unwrap();
        for n in 0..=3 {
            for m in 0..=3 {
                let cats = cat_split(&xi, idx(n, m), &b, 160).unwrap();
                let full = psjp_pajp_squeezed(&xi, idx(n, m), &b, 160).unwrap();
                let f = cats.recombined().unwrap().fidelity(&full.state);
                assert!((1.0 - f).abs() < 1e-9, "n={n} m={m}");
                let nu = n as i64 - m as i64;
                for p in 0..160 {
                    if (p as i64) < nu {
                        continue;
                    }
                    let sign = if (p as i64 - nu) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((cats.minus.amps()[p] - cats.plus.amps()[p] * sign).norm() < 1e-14);
                }
                assert!(!cats.degenerate);
            }
        }
    }

    #[test]
    fn degenerate_cat_flagged() {
        let xi = SqueezeParams::polar(0.0, 0.0);
        let b = BeamSplitterParams::from_transmittance(0.5).unwrap();
        let cats = cat_split(&xi, idx(3, 1), &b, 10).unwrap();
        assert!(cats.degenerate);
        assert!((cats.plus.amps()[2].norm() - 1.0).abs() < 1e-14);
        assert!((cats.minus.amps()[2].norm() - 1.0).abs() < 1e-14);
        assert!(matches!(cat_split(&xi, idx(1, 3), &b, 10), Err(Error::Annihilated)));
    }
}
