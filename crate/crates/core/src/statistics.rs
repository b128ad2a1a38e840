//! Photon-number statistics and event probabilities for coherent inputs.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamsplitter::{BeamSplitterParams, ConditionalIndices};
use crate::error::{Error, Result};
use crate::export::write_csv;
use crate::fock::{CoherentParams, FockVector};
use crate::jpstates::chi1;
use crate::jpstates::coherent::{coherent_dim_for, ladder_weights, normalization_chi1};
use crate::numerics::{binomial, laguerre, ln_binomial, log_factorial};
use crate::scalar::cpowu;

/// Largest tolerated missing weight in a closed-form distribution.
const DISTRIBUTION_TAIL: f64 = 1e-10;

/// Photon-number distribution and its first two moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStats {
    pub distribution: Vec<f64>,
    pub mean: f64,
    pub second_moment: f64,
    /// `(⟨n̂²⟩ − ⟨n̂⟩²)/⟨n̂⟩ − 1`; NaN for the vacuum.
    pub mandel_q: f64,
}

impl PhotonStats {
    fn from_moments(distribution: Vec<f64>, mean: f64, second_moment: f64) -> Self {
        let mandel_q = if mean > 0.0 { (second_moment - mean * mean) / mean - 1.0 } else { f64::NAN };
        Self { distribution, mean, second_moment, mandel_q }
    }

    /// Statistics read directly off a state vector.
    pub fn from_vector(v: &FockVector<f64>) -> Self {
        let norm = v.norm_sqr();
        let distribution: Vec<f64> = v.amps().iter().map(|a| a.norm_sqr() / norm).collect();
        let mean = distribution.iter().enumerate().map(|(l, p)| l as f64 * p).sum();
        let second = distribution.iter().enumerate().map(|(l, p)| (l * l) as f64 * p).sum();
        Self::from_moments(distribution, mean, second)
    }

    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// `w_l = a_l β′^{l−ν}/(l−ν)!` for `l ≥ μ`.
fn amplitude_weights(bp: Complex64, idx: ConditionalIndices, r2: f64) -> Vec<Complex64> {
    let a = ladder_weights(idx.n, r2);
    (0..=idx.n)
        .map(|l| {
            if l < idx.mu() {
                return Complex64::new(0.0, 0.0);
            }
            let e = (l as i64 - idx.nu()) as usize;
            cpowu(bp, e) * (a[l] / log_factorial::<f64>(e).exp())
        })
        .collect()
}

/// `⟨Ψ|â^p(â†)^p|Ψ⟩ = Σ_{l,l′} w_l w_{l′}* χ⁽¹⁾_{l′+p,l+p}(β′) / N′`.
pub fn antinormal_moment(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
    p: usize,
) -> Result<f64> {
    let bp = beta.attenuated(bs.t()).beta;
    let nprime = normalization_chi1(bp, idx, bs);
    if !(nprime > 0.0) {
        return Err(Error::Annihilated);
    }
    let w = amplitude_weights(bp, idx, bs.reflectance());
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, wl) in w.iter().enumerate().skip(idx.mu()) {
        for (lp, wlp) in w.iter().enumerate().skip(idx.mu()) {
            acc += wl * wlp.conj() * chi1(lp + p, l + p, bp);
        }
    }
    Ok(acc.re / nprime)
}

/// Closed-form statistics of the conditional coherent-input state: the
/// distribution `p(l) = e^{−|β′|²} l! |β′|^{2(l−ν)}/N′ |Σ_j a_j θ(l−j)/((j−ν)!(l−j)!)|²`,
/// `⟨n̂⟩ = ⟨ââ†⟩ − 1` and `⟨n̂²⟩ = ⟨â²(â†)²⟩ − 3⟨ââ†⟩ + 1`.
pub fn photon_stats_closed(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
) -> Result<PhotonStats> {
    let bp = beta.attenuated(bs.t()).beta;
    let nprime = normalization_chi1(bp, idx, bs);
    if !(nprime > 0.0) {
        return Err(Error::Annihilated);
    }
    let a = ladder_weights(idx.n, bs.reflectance());
    let dim = coherent_dim_for(beta, idx);
    let (x, nu) = (bp.norm_sqr(), idx.nu());
    let distribution: Vec<f64> = (0..dim)
        .map(|l| {
            if (l as i64) < nu {
                return 0.0;
            }
            let e = (l as i64 - nu) as usize;
            if e > 0 && x == 0.0 {
                return 0.0;
            }
            let pow = if e == 0 { 0.0 } else { e as f64 * x.ln() };
            let base = -x + log_factorial::<f64>(l) + pow;
            let mut s = 0.0;
            for j in idx.mu()..=idx.n.min(l) {
                let jn = (j as i64 - nu) as usize;
                s += a[j] * (-log_factorial::<f64>(jn) - log_factorial::<f64>(l - j) + 0.5 * base).exp();
            }
            s * s / nprime
        })
        .collect();
    let total: f64 = distribution.iter().sum();
    if (1.0 - total).abs() > DISTRIBUTION_TAIL {
        return Err(Error::TruncationInadequate { tail: (1.0 - total).abs(), threshold: DISTRIBUTION_TAIL, dim });
    }
    let a1 = antinormal_moment(beta, idx, bs, 1)?;
    let a2 = antinormal_moment(beta, idx, bs, 2)?;
    Ok(PhotonStats::from_moments(distribution, a1 - 1.0, a2 - 3.0 * a1 + 1.0))
}

/// `e^{−|α|²} χ⁽²⁾_{k,j}(α, ν)` in its Laguerre form: for `ν ≥ 0`
/// `Σ_l C(k,l) (j−ν)!/(l! j!) L_{j−ν}^{l+ν}(−|α|²) |α|^{2l}`, for `ν < 0`
/// `Σ_l C(k,l) (j+l)!/(l! j!) L_{j+l}^{|ν|−l}(−|α|²) |α|^{2|ν|}`.
pub fn chi2_scaled(k: usize, j: usize, nu: i64, alpha: Complex64) -> f64 {
    let x = alpha.norm_sqr();
    let abs_nu = nu.unsigned_abs() as usize;
    let mut acc = 0.0;
    for l in 0..=k {
        let c = binomial::<f64>(k, l) / log_factorial::<f64>(l).exp();
        acc += if nu >= 0 {
            let jn = j - abs_nu;
            let r = (log_factorial::<f64>(jn) - log_factorial::<f64>(j)).exp();
            c * r * laguerre::<f64, f64>(jn, (l + abs_nu) as f64, -x) * x.powi(l as i32)
        } else {
            let r = (log_factorial::<f64>(j + l) - log_factorial::<f64>(j)).exp();
            c * r * laguerre::<f64, f64>(j + l, abs_nu as f64 - l as f64, -x) * x.powi(abs_nu as i32)
        };
    }
    acc
}

/// `χ⁽²⁾_{k,j}(α, ν)` in its Laguerre form.
pub fn chi2(k: usize, j: usize, nu: i64, alpha: Complex64) -> f64 {
    alpha.norm_sqr().exp() * chi2_scaled(k, j, nu, alpha)
}

/// `χ⁽²⁾_{k,j}(α, ν) = Σ_{p≥δ} C(p+k,k) C(p+j,j) |α|^{2p}/(p+ν)!`, summed until a
/// term falls below `1e-16` of the partial sum past the series maximum.
pub fn chi2_series(k: usize, j: usize, nu: i64, alpha: Complex64) -> f64 {
    let x = alpha.norm_sqr();
    let start = if nu < 0 { (-nu) as usize } else { 0 };
    let mut sum = 0.0;
    let mut p = start;
    loop {
        let pow = if p == 0 { 0.0 } else { p as f64 * x.ln() };
        let ln_t = ln_binomial::<f64>(p + k, k) + ln_binomial::<f64>(p + j, j) + pow
            - log_factorial::<f64>((p as i64 + nu) as usize);
        let t = if p > 0 && x == 0.0 { 0.0 } else { ln_t.exp() };
        sum += t;
        // past the peak of the summand (p ≳ |α|²) the terms decrease monotonically
        if (p as f64) > x + 1.0 && t < 1e-16 * sum {
            break;
        }
        if x == 0.0 || p > 100_000 {
            break;
        }
        p += 1;
    }
    sum
}

/// `P(n,m) = e^{−|β|²} |R|^{−2ν} n!/(|T|^{2m} m!) Σ_{k,j=μ}^{n} (−|R|²)^{k+j}
/// C(m,k−ν) C(m,j−ν) χ⁽²⁾_{k,j}(β′, ν)`. The `|R|` powers are combined before
/// evaluation, so the result stays finite at `R = 0`.
pub fn probability_closed_coherent(
    beta: &CoherentParams<f64>,
    idx: ConditionalIndices,
    bs: &BeamSplitterParams<f64>,
) -> Result<f64> {
    let t2 = bs.transmittance();
    if t2 <= 0.0 {
        return Err(Error::invalid("closed-form probability needs T != 0"));
    }
    let r2 = bs.reflectance();
    let bp = beta.attenuated(bs.t()).beta;
    let (n, m, nu) = (idx.n, idx.m, idx.nu());
    let mut acc = 0.0;
    for k in idx.mu()..=n {
        let kn = k as i64 - nu;
        if kn < 0 || kn as usize > m {
            continue;
        }
        for j in idx.mu()..=n {
            let jn = j as i64 - nu;
            if jn < 0 || jn as usize > m {
                continue;
            }
            let rpow = (k + j) as i64 - nu;
            let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
            let c = binomial::<f64>(m, kn as usize) * binomial::<f64>(m, jn as usize);
            acc += sign * r2.powi(rpow as i32) * c * chi2_scaled(k, j, nu, bp);
        }
    }
    // e^{−|β|²} χ⁽²⁾ = e^{−|R|²|β|²} χ⁽²⁾_scaled
    let ln_pref = -r2 * beta.beta.norm_sqr() + log_factorial::<f64>(n) - log_factorial::<f64>(m) - m as f64 * t2.ln();
    Ok(ln_pref.exp() * acc)
}

/// One row of a probability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub abs_beta: f64,
    pub n: usize,
    pub m: usize,
    pub t2: f64,
    pub probability: f64,
}

/// `P(n,m)` for every combination of `|β|`, `(n, m)` and `|T|²`, with real
/// `β` and real beam-splitter amplitudes.
pub fn probability_sweep(abs_betas: &[f64], pairs: &[(usize, usize)], t2s: &[f64]) -> Result<Vec<ProbabilityRow>> {
    let mut jobs = Vec::new();
    for &t2 in t2s {
        for &(n, m) in pairs {
            for &b in abs_betas {
                jobs.push((t2, n, m, b));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(t2, n, m, b)| {
            let bs = BeamSplitterParams::from_transmittance(t2)?;
            let p = probability_closed_coherent(
                &CoherentParams::new(Complex64::new(b, 0.0)),
                ConditionalIndices::new(n, m),
                &bs,
            )?;
            Ok(ProbabilityRow { abs_beta: b, n, m, t2, probability: p })
        })
        .collect()
}

/// Columns `abs_beta, n, m, t2, probability`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[ProbabilityRow]) -> Result<()> {
    write_csv(
        out,
        &["abs_beta", "n", "m", "t2", "probability"],
        rows.iter().map(|r| vec![r.abs_beta, r.n as f64, r.m as f64, r.t2, r.probability]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamsplitter::probability_map;
    use crate::fock::coherent_state;
    use crate::jpstates::psjp_pajp_coherent;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn idx(n: usize, m: usize) -> ConditionalIndices {
        ConditionalIndices::new(n, m)
    }

    /// Kummer's function `Φ(a, b, z)` by direct series summation.
    fn kummer(a: f64, b: f64, z: f64) -> f64 {
        let (mut term, mut sum) = (1.0, 1.0);
        for s in 0..400 {
            let s = s as f64;
            term *= (a + s) / (b + s) * z / (s + 1.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() && s > z.abs() {
                break;
            }
        }
        sum
    }

    #[test]
    fn kummer_transformation_and_laguerre_reduction() {
        for a in 0..4 {
            for b in 1..5 {
                for &z in &[0.3, 1.7, 4.0] {
                    let (a, b) = (a as f64, b as f64);
                    let lhs = kummer(a, b, z);
                    let rhs = z.exp() * kummer(b - a, b, -z);
                    assert!((lhs - rhs).abs() < 1e-11 * lhs.abs(), "a={a} b={b} z={z}");
                }
            }
        }
        for n in 0..6usize {
            for b in 0..4usize {
                for &z in &[0.5, 2.5] {
                    let lhs = kummer(-(n as f64), (b + 1) as f64, z);
                    let pref = (log_factorial::<f64>(n) + log_factorial::<f64>(b) - log_factorial::<f64>(n + b)).exp();
                    let rhs = pref * laguerre::<f64, f64>(n, b as f64, z);
                    assert!((lhs - rhs).abs() < 1e-12, "n={n} b={b} z={z}");
                }
            }
        }
    }

    #[test]
    fn chi2_branches_match_series() {
        for &abs in &[0.0, 0.4, 1.3, 2.07, 3.0] {
            let alpha = c(abs * 0.6, abs * 0.8);
            for nu in -4i64..=4 {
                for k in 0..=6usize {
                    for j in 0..=6usize {
                        if nu >= 0 && (k < nu as usize || j < nu as usize) {
                            continue;
                        }
                        let s = chi2_series(k, j, nu, alpha);
                        let l = chi2(k, j, nu, alpha);
                        if s == 0.0 {
                            assert_eq!(l, 0.0);
                            continue;
                        }
                        assert!((s - l).abs() < 1e-10 * s, "k={k} j={j} nu={nu} |a|={abs}: {s} vs {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn fig_probabilities() {
        let b = BeamSplitterParams::from_transmittance(0.81).unwrap();
        let beta = CoherentParams::new(c(2.3, 0.0));
        let p23 = probability_closed_coherent(&beta, idx(2, 3), &b).unwrap();
        let p32 = probability_closed_coherent(&beta, idx(3, 2), &b).unwrap();
        assert!((p23 - 0.097).abs() < 0.005, "{p23}");
        assert!((p32 - 0.067).abs() < 0.005, "{p32}");
    }

    #[test]
    fn closed_probability_matches_map() {
        for &t2 in &[0.4, 0.81] {
            let b = BeamSplitterParams::from_transmittance_phases(t2, 0.3, -0.7).unwrap();
            for &abs in &[0.5, 1.0, 2.3, 3.0] {
                let beta = CoherentParams::new(c(abs * 0.8, -abs * 0.6));
                let input = coherent_state(&beta, 70).unwrap();
                for n in 0..=4 {
                    let map = probability_map(&input, n, &b, 6).unwrap();
                    for m in 0..=6 {
                        let p = probability_closed_coherent(&beta, idx(n, m), &b).unwrap();
                        assert!((p - map[m]).abs() < 1e-9, "t2={t2} |b|={abs} n={n} m={m}: {p} vs {}", map[m]);
                    }
                }
            }
        }
    }

    #[test]
    fn subtraction_probability_vanishes_with_amplitude() {
        let b = BeamSplitterParams::from_transmittance(0.81).unwrap();
        let beta = CoherentParams::new(c(1e-3, 0.0));
        for n in 0..3 {
            for m in n + 1..5 {
                assert!(probability_closed_coherent(&beta, idx(n, m), &b).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_zero_is_poissonian() {
        let b = BeamSplitterParams::from_transmittance(0.7).unwrap();
        let beta = CoherentParams::new(c(1.4, 0.3));
        let s = photon_stats_closed(&beta, idx(0, 0), &b).unwrap();
        assert!(s.mandel_q.abs() < 1e-9);
        let bp2 = beta.attenuated(b.t()).beta.norm_sqr();
        assert!((s.mean - bp2).abs() < 1e-9);
    }

    #[test]
    fn closed_distribution_matches_amplitudes() {
        let b = BeamSplitterParams::from_transmittance(0.81).unwrap();
        let beta = CoherentParams::new(c(2.07 / 0.9, 0.0));
        for &(n, m) in &[(3, 2), (2, 3)] {
            let s = photon_stats_closed(&beta, idx(n, m), &b).unwrap();
            let st = psjp_pajp_coherent(&beta, idx(n, m), &b, s.distribution.len()).unwrap().state;
            for (l, p) in s.distribution.iter().enumerate() {
                assert!((p - st.amps()[l].norm_sqr()).abs() < 1e-10, "l={l}");
            }
        }
    }

    #[test]
    fn moments_consistent_with_distribution() {
        for &t2 in &[0.4, 0.81] {
            let b = BeamSplitterParams::from_transmittance_phases(t2, 0.2, 0.5).unwrap();
            for &abs in &[0.5, 2.3] {
                let beta = CoherentParams::new(c(0.0, abs));
                for n in 0..=4 {
                    for m in 0..=4 {
                        let s = photon_stats_closed(&beta, idx(n, m), &b).unwrap();
                        let d = PhotonStats::from_vector(&FockVector::new(
                            s.distribution.iter().map(|p| c(p.sqrt(), 0.0)).collect(),
                        ));
                        assert!((s.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                        assert!((s.mean - d.mean).abs() < 1e-9, "n={n} m={m}");
                        assert!((s.second_moment - d.second_moment).abs() < 1e-9 * d.second_moment.max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn mandel_q_regression() {
        // regression values at β′ = 2.07, |T|² = 0.81
        let b = BeamSplitterParams::from_transmittance(0.81).unwrap();
        let beta = CoherentParams::new(c(2.07 / 0.9, 0.0));
        let q32 = photon_stats_closed(&beta, idx(3, 2), &b).unwrap().mandel_q;
        let q23 = photon_stats_closed(&beta, idx(2, 3), &b).unwrap().mandel_q;
        let st32 = psjp_pajp_coherent(&beta, idx(3, 2), &b, 80).unwrap().state;
        assert!((q32 - PhotonStats::from_vector(&st32).mandel_q).abs() < 1e-9);
        assert!((q32 - Q_32).abs() < 1e-9, "{q32}");
        assert!((q23 - Q_23).abs() < 1e-9, "{q23}");
    }

    const Q_32: f64 = 0.991214825117744;
    const Q_23: f64 = 1.423228770855431;

    #[test]
    fn sweep_csv() {
        let rows = probability_sweep(&[0.5, 1.0], &[(2, 3), (3, 2)], &[0.81]).unwrap();
        assert_eq!(rows.len(), 4);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("abs_beta,n,m,t2,probability\n"));
    }
}
