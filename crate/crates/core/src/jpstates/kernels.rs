//! Truncated displacement and squeeze operators built from exact matrix elements.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{squeezed_vacuum_with_threshold, tail_threshold, FockVector, SqueezeParams};
use crate::numerics::{laguerre, log_factorial};

/// Largest tolerated deviation of a used column norm from one.
pub const UNITARITY_BUDGET: f64 = 1e-9;

/// `⟨q|D̂(β)|k⟩`.
pub fn displacement_element(beta: Complex64, q: usize, k: usize) -> Complex64 {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return if q == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let abs_ln = beta.norm().ln();
    if q >= k {
        let d = q - k;
        let ln_mag = 0.5 * (log_factorial::<f64>(k) - log_factorial::<f64>(q)) + d as f64 * abs_ln - 0.5 * x;
        let l = laguerre::<f64, f64>(k, d as f64, x);
        Complex64::from_polar(ln_mag.exp() * l, d as f64 * beta.arg())
    } else {
        let d = k - q;
        let ln_mag = 0.5 * (log_factorial::<f64>(q) - log_factorial::<f64>(k)) + d as f64 * abs_ln - 0.5 * x;
        let l = laguerre::<f64, f64>(q, d as f64, x);
        Complex64::from_polar(ln_mag.exp() * l, d as f64 * (-beta.conj()).arg())
    }
}

/// `rows × cols` block of `D̂(β)`.
pub fn displacement_matrix(beta: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |q, k| displacement_element(beta, q, k))
}

/// `rows × cols` block of `Ŝ(ξ)`. The first column is the squeezed vacuum;
/// the rest follow from `â†Ŝ = Ŝ(cosh r â† − e^{−iφ} sinh r â)`:
/// `S_{m,k+1} = (√m S_{m−1,k} + e^{−iφ} sinh r √k S_{m,k−1}) / (cosh r √(k+1))`.
pub fn squeeze_matrix(p: &SqueezeParams<f64>, rows: usize, cols: usize) -> Result<DMatrix<Complex64>> {
    let (vac, _) = squeezed_vacuum_with_threshold(p, rows.max(2), f64::INFINITY)?;
    let (c, s) = (p.r().cosh(), p.r().sinh());
    let e = Complex64::from_polar(s, -p.phase());
    let mut out = DMatrix::<Complex64>::zeros(rows, cols);
    for q in 0..rows {
        out[(q, 0)] = vac.amps()[q];
    }
    for k in 0..cols.saturating_sub(1) {
        let denom = c * ((k + 1) as f64).sqrt();
        for q in 0..rows {
            let mut acc = Complex64::new(0.0, 0.0);
            if q > 0 {
                acc += out[(q - 1, k)] * (q as f64).sqrt();
            }
            if k > 0 {
                acc += out[(q, k - 1)] * e * (k as f64).sqrt();
            }
            out[(q, k + 1)] = acc / denom;
        }
    }
    Ok(out)
}

/// `max_k |1 − Σ_q |M_{qk}|²|` over all columns.
pub fn column_unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|c| (1.0 - c.iter().map(|a| a.norm_sqr()).sum::<f64>()).abs()).fold(0.0, f64::max)
}

/// Applies an operator block to `v`. Every column on which `v` carries more
/// than `1e-20` of its weight must be unitary to within [`UNITARITY_BUDGET`].
pub fn apply_checked(m: &DMatrix<Complex64>, v: &FockVector<f64>) -> Result<FockVector<f64>> {
    let cols = m.ncols();
    let top = v.support_top().unwrap_or(0);
    if top >= cols {
        return Err(Error::DimensionMismatch { expected: cols, got: top + 1 });
    }
    let total = v.norm_sqr();
    for k in 0..=top {
        if v.amps()[k].norm_sqr() <= 1e-20 * total {
            continue;
        }
        let norm: f64 = m.column(k).iter().map(|a| a.norm_sqr()).sum();
        let defect = (1.0 - norm).abs();
        if defect > UNITARITY_BUDGET {
            return Err(Error::TruncationInadequate { tail: defect, threshold: UNITARITY_BUDGET, dim: m.nrows() });
        }
    }
    let x = DVector::from_iterator(top + 1, v.amps()[..=top].iter().copied());
    let y = m.columns(0, top + 1) * x;
    Ok(FockVector::new(y.as_slice().to_vec()))
}

/// Keeps the first `dim` amplitudes, failing if more than the tail threshold
/// of the weight lies beyond them.
fn truncate_checked(v: FockVector<f64>, dim: usize) -> Result<FockVector<f64>> {
    if v.dim() <= dim {
        return Ok(v.resized(dim));
    }
    let total = v.norm_sqr();
    let lost: f64 = v.amps()[dim..].iter().map(|a| a.norm_sqr()).sum();
    if total > 0.0 && lost > tail_threshold::<f64>() * total {
        return Err(Error::TruncationInadequate { tail: lost / total, threshold: tail_threshold::<f64>(), dim });
    }
    Ok(v.resized(dim))
}

/// `D̂(β) v`, computed in a basis padded beyond the displaced support and
/// returned in `dim` basis states.
pub fn displace(beta: Complex64, v: &FockVector<f64>, dim: usize) -> Result<FockVector<f64>> {
    let top = v.support_top().unwrap_or(0) + 1;
    let b = beta.norm();
    let pad = (8.0 * b * (top as f64).sqrt() + 4.0 * b * b + 10.0 * b).ceil() as usize + 16;
    let work = dim.max(top) + pad;
    let m = displacement_matrix(beta, work, top);
    truncate_checked(apply_checked(&m, &v.resized(top))?, dim)
}

/// `Ŝ(ξ) v`, computed in a padded basis and returned in `dim` basis states.
pub fn squeeze(p: &SqueezeParams<f64>, v: &FockVector<f64>, dim: usize) -> Result<FockVector<f64>> {
    let top = v.support_top().unwrap_or(0) + 1;
    let stretch = (2.0 * p.r()).exp();
    let pad = (top as f64 * stretch * 1.5).ceil() as usize + 40 + (40.0 * stretch) as usize;
    let work = dim.max(top) + pad;
    let m = squeeze_matrix(p, work, top)?;
    truncate_checked(apply_checked(&m, &v.resized(top))?, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, squeezed_vacuum, CoherentParams};

    #[test]
    fn displaced_vacuum_is_coherent() {
        let beta = Complex64::new(1.1, -0.7);
        let v = displace(beta, &FockVector::basis(1, 0), 50).unwrap();
        let coh = coherent_state(&CoherentParams::new(beta), 50).unwrap();
        assert!((v.fidelity(&coh) - 1.0).abs() < 1e-12);
        assert!((v.amps()[3] - coh.amps()[3]).norm() < 1e-12);
    }

    #[test]
    fn displacement_group_law() {
        // D(a)D(b) = e^{(a b* − a* b)/2} D(a+b)
        let (a, b) = (Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.5));
        let n = 60;
        let da = displacement_matrix(a, n, n);
        let db = displacement_matrix(b, n, n);
        let dab = displacement_matrix(a + b, n, n);
        let phase = ((a * b.conj() - a.conj() * b) / 2.0).exp();
        let prod = &da * &db;
        for q in 0..8 {
            for k in 0..8 {
                assert!((prod[(q, k)] - phase * dab[(q, k)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_matches_exponential() {
        let beta = Complex64::new(0.6, 0.2);
        let n = 40;
        let mut gen = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n - 1 {
            let s = ((k + 1) as f64).sqrt();
            gen[(k + 1, k)] += beta * s;
            gen[(k, k + 1)] -= beta.conj() * s;
        }
        let exact = gen.exp();
        let kernel = displacement_matrix(beta, n, n);
        for q in 0..10 {
            for k in 0..10 {
                assert!((exact[(q, k)] - kernel[(q, k)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn squeeze_first_column_is_vacuum() {
        let p = SqueezeParams::polar(0.5, 0.9);
        let m = squeeze_matrix(&p, 60, 5).unwrap();
        let vac = squeezed_vacuum(&p, 60).unwrap();
        for q in 0..60 {
            assert!((m[(q, 0)] - vac.amps()[q]).norm() < 1e-13);
        }
        assert!(column_unitarity_defect(&m) < 1e-10);
    }

    #[test]
    fn squeeze_matches_exponential() {
        let p = SqueezeParams::polar(0.35, -0.6);
        let n = 70;
        // S(ξ) = exp(−(ξ a†² − ξ* a²)/2)
        let mut gen = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n - 2 {
            let s = (((k + 1) * (k + 2)) as f64).sqrt();
            gen[(k + 2, k)] -= p.xi * (0.5 * s);
            gen[(k, k + 2)] += p.xi.conj() * (0.5 * s);
        }
        let exact = gen.exp();
        let kernel = squeeze_matrix(&p, n, 8).unwrap();
        for q in 0..20 {
            for k in 0..8 {
                assert!((exact[(q, k)] - kernel[(q, k)]).norm() < 1e-11, "q={q} k={k}");
            }
        }
    }

    #[test]
    fn inverse_squeeze_restores_vector() {
        let p = SqueezeParams::polar(0.4, 0.3);
        let inv = SqueezeParams::new(-p.xi);
        let v = FockVector::basis(4, 3);
        let w = squeeze(&p, &v, 90).unwrap();
        let back = squeeze(&inv, &w, 90).unwrap();
        assert!((back.amps()[3].re - 1.0).abs() < 1e-9);
    }
}
