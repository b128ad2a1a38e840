//! Photon-chopping detection with finite efficiency, Bayes inversion of the
//! click record, Fock-state ancilla mixtures and the mixed conditional output.

use std::io::Write;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamsplitter::{probability_map, BeamSplitterParams, ConditionalIndices, UNREACHABLE_PROBABILITY};
use crate::error::{Error, Result};
use crate::export::write_csv;
use crate::fock::FockVector;
use crate::jpstates::jp_state_general;
use crate::numerics::ln_binomial;
use crate::phasespace::{
    quadrature_dist_numeric, wigner_density, GridValues, PhaseGrid, QuadratureCurve, QuadratureSpec,
};

/// `N` on/off diodes behind a balanced `2N`-port, each with efficiency `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub diodes: usize,
    pub eta: f64,
}

impl DetectorModel {
    pub fn new(diodes: usize, eta: f64) -> Result<Self> {
        if diodes == 0 {
            return Err(Error::invalid("detector needs at least one diode"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("efficiency {eta} outside (0, 1]")));
        }
        Ok(Self { diodes, eta })
    }
}

/// `⌊num/den⌋` as a float, keeping 64 significant bits of the quotient.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = (den.bits() as i64 - num.bits() as i64 + 64).max(0);
    let q = (num.abs() << shift as usize) / den;
    let v = q.to_f64().unwrap_or(f64::INFINITY) * (-(shift as f64)).exp2();
    if num.is_negative() {
        -v
    } else {
        v
    }
}

fn big_binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `P̃_N(k|m) = N^{−m} C(N,k) Σ_l (−1)^l C(k,l) (k−l)^m` for `k ≤ m`, zero
/// otherwise. Rows are `k`, columns `m`, both `0..=m_max`. The alternating
/// sum is evaluated in exact integer arithmetic.
pub fn chopping_matrix(diodes: usize, m_max: usize) -> DMatrix<f64> {
    let size = m_max + 1;
    let den: Vec<BigInt> = (0..size).map(|m| BigInt::from(diodes).pow(m as u32)).collect();
    let mut out = DMatrix::<f64>::zeros(size, size);
    for k in 0..=m_max.min(diodes) {
        let ck = big_binomial(diodes, k);
        for m in k..size {
            out[(k, m)] = ratio_to_f64(&(&ck * surjection_count(m, k)), &den[m]);
        }
    }
    out
}

/// `M_{l,m}(η) = C(m,l) η^l (1−η)^{m−l}` for `l ≤ m`.
pub fn loss_matrix(eta: f64, m_max: usize) -> DMatrix<f64> {
    let size = m_max + 1;
    DMatrix::from_fn(size, size, |l, m| {
        if l > m {
            return 0.0;
        }
        if eta == 1.0 {
            return if l == m { 1.0 } else { 0.0 };
        }
        (ln_binomial::<f64>(m, l) + l as f64 * eta.ln() + (m - l) as f64 * (1.0 - eta).ln()).exp()
    })
}

/// `P̃_{N,η}(k|m) = Σ_l P̃_N(k|l) M_{l,m}(η)`.
pub fn click_given_photons(det: &DetectorModel, m_max: usize) -> DMatrix<f64> {
    chopping_matrix(det.diodes, m_max) * loss_matrix(det.eta, m_max)
}

/// Largest photon number in mode 2 reachable from `input ⊗ |n⟩`.
pub fn reachable_m_max(input: &FockVector<f64>, n: usize) -> usize {
    n + input.support_top().unwrap_or(0)
}

/// Truncation `n0 + ⌈|β|² + 8|β|⌉` for a coherent input of amplitude `|β|`
/// and ancilla photon numbers up to `n0`.
pub fn coherent_m_max(n0: usize, abs_beta: f64) -> usize {
    n0 + (abs_beta * abs_beta + 8.0 * abs_beta).ceil() as usize
}

/// Bayes posterior over the true photon number given `k` clicks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    /// `P_{N,η}(n, m|k)` for `m = 0..`.
    pub probabilities: Vec<f64>,
    /// The prior `P(n, m)`.
    pub prior: Vec<f64>,
    /// `P̃_{N,η}(n, k) = Σ_m P̃_{N,η}(k|m) P(n,m)`.
    pub evidence: f64,
    pub n: usize,
    pub k: usize,
}

impl Posterior {
    /// Columns `m, prior, posterior`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(
            out,
            &["m", "prior", "posterior"],
            self.prior.iter().zip(&self.probabilities).enumerate().map(|(m, (a, b))| vec![m as f64, *a, *b]),
        )
    }
}

/// Evidence and posterior from a prior and the click matrix.
fn bayes(prior: Vec<f64>, clicks: &DMatrix<f64>, n: usize, k: usize) -> Result<Posterior> {
    let joint: Vec<f64> =
        prior.iter().enumerate().map(|(m, p)| if k < clicks.nrows() { clicks[(k, m)] * p } else { 0.0 }).collect();
    let evidence: f64 = joint.iter().sum();
    if !(evidence > UNREACHABLE_PROBABILITY) {
        return Err(Error::Unreachable { probability: evidence });
    }
    let probabilities = joint.iter().map(|j| j / evidence).collect();
    Ok(Posterior { probabilities, prior, evidence, n, k })
}

/// `P_{N,η}(n, m|k) = P̃_{N,η}(k|m) P(n,m) / P̃_{N,η}(n, k)` for the input
/// `|Φ⟩ ⊗ |n⟩`, over every reachable `m`.
pub fn posterior_photons_given_clicks(
    det: &DetectorModel,
    input: &FockVector<f64>,
    n: usize,
    bs: &BeamSplitterParams<f64>,
    k: usize,
) -> Result<Posterior> {
    let m_max = reachable_m_max(input, n).max(k);
    let prior = probability_map(input, n, bs, m_max)?;
    bayes(prior, &click_given_photons(det, m_max), n, k)
}

/// Weights `p̃_n` of a Fock-state mixture for the ancilla mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockMixture {
    weights: Vec<f64>,
}

impl FockMixture {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("mixture weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("mixture weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    /// The pure Fock state `|n⟩`.
    pub fn pure(n: usize) -> Self {
        let mut weights = vec![0.0; n + 1];
        weights[n] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.weights.iter().enumerate().map(|(n, w)| (n as f64 - mean).powi(2) * w).sum()
    }
}

/// `p̃_n = C(n0,n) p^n (1−p)^{n0−n}`, evaluated in log space.
pub fn binomial_mixture(n0: usize, p: f64) -> Result<FockMixture> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("binomial parameter {p} outside (0, 1)")));
    }
    let mut weights: Vec<f64> = (0..=n0)
        .map(|n| (ln_binomial::<f64>(n0, n) + n as f64 * p.ln() + (n0 - n) as f64 * (1.0 - p).ln()).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(FockMixture { weights })
}

/// Exact mean `n0 p` and variance `n0 p (1−p)` of the binomial mixture.
pub fn binomial_moments(n0: usize, p: f64) -> (f64, f64) {
    let n0 = n0 as f64;
    (n0 * p, n0 * p * (1.0 - p))
}

/// Members with a relative weight below this are left out of an ensemble.
pub const ENSEMBLE_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: FockVector<f64>,
    pub n: usize,
    pub m: usize,
}

/// Convex combination of pure conditional states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEnsemble {
    pub members: Vec<EnsembleMember>,
    /// `P_{N,η}(k) = Σ_{n,m} p̃_n P̃_{N,η}(k|m) P(n,m)`.
    pub total_probability: f64,
}

/// How the members of a mixed conditional output are weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleWeighting {
    /// `p̃_n P_{N,η}(n,m|k)`, the per-ancilla posterior averaged over `p̃_n`.
    #[default]
    Posterior,
    /// `p̃_n P̃_{N,η}(k|m) P(n,m) / P_{N,η}(k)`, the joint posterior over `(n, m)`.
    Joint,
}

/// Mixed output after `k` clicks: members `|Ψ_{n,m}⟩` weighted per `weighting`
/// and renormalized, omitting those below [`ENSEMBLE_CUTOFF`]. The total
/// probability does not depend on the weighting.
pub fn mixed_conditional_output(
    input: &FockVector<f64>,
    mix: &FockMixture,
    bs: &BeamSplitterParams<f64>,
    det: &DetectorModel,
    k: usize,
    weighting: EnsembleWeighting,
) -> Result<ConditionalEnsemble> {
    let input = input.normalize()?;
    let n_max = mix.weights.len() - 1;
    let m_max = reachable_m_max(&input, n_max).max(k);
    let clicks = click_given_photons(det, m_max);
    let mut raw = Vec::new();
    let mut total = 0.0;
    for (n, &pn) in mix.weights.iter().enumerate() {
        if pn == 0.0 || k > m_max {
            continue;
        }
        let prior = probability_map(&input, n, bs, m_max)?;
        let joint: Vec<f64> = prior.iter().enumerate().map(|(m, p)| pn * clicks[(k, m)] * p).collect();
        let evidence: f64 = joint.iter().sum();
        total += evidence;
        if !(evidence > 0.0) {
            continue;
        }
        let scale = match weighting {
            EnsembleWeighting::Posterior => pn / evidence,
            EnsembleWeighting::Joint => 1.0,
        };
        raw.extend(joint.iter().enumerate().filter(|(_, &j)| j > 0.0).map(|(m, &j)| (n, m, j * scale)));
    }
    if !(total > UNREACHABLE_PROBABILITY) {
        return Err(Error::Unreachable { probability: total });
    }
    let norm: f64 = raw.iter().map(|r| r.2).sum();
    let members = raw
        .into_par_iter()
        .filter(|r| r.2 >= ENSEMBLE_CUTOFF * norm)
        .filter_map(|(n, m, w)| match jp_state_general(&input, ConditionalIndices::new(n, m), bs) {
            Ok(s) => Some(Ok(EnsembleMember { weight: w / norm, state: s.state, n, m })),
            Err(Error::Annihilated) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalEnsemble { members, total_probability: total })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Quadrature(QuadratureSpec),
    Wigner(PhaseGrid),
    PhotonDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObservableData {
    Quadrature(QuadratureCurve),
    Wigner(GridValues),
    PhotonDistribution(Vec<f64>),
}

impl ConditionalEnsemble {
    pub fn weight_sum(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    /// `Σ w |Ψ⟩⟨Ψ|` in a basis large enough for every member.
    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.members.iter().map(|m| m.state.support_top().map_or(1, |t| t + 1)).max().unwrap_or(1);
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for mem in &self.members {
            let c = mem.state.amps();
            let top = c.len().min(dim);
            for i in 0..top {
                for j in 0..top {
                    rho[(i, j)] += c[i] * c[j].conj() * mem.weight;
                }
            }
        }
        rho
    }

    /// Weighted sum of the members' observables.
    pub fn observable(&self, obs: &Observable) -> ObservableData {
        match obs {
            Observable::Quadrature(spec) => {
                // fixed summation order keeps the output reproducible
                let values = self
                    .members
                    .par_iter()
                    .map(|mem| scaled(quadrature_dist_numeric(&mem.state, spec).values, mem.weight))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .fold(vec![0.0; spec.grid().len()], add);
                ObservableData::Quadrature(QuadratureCurve { spec: spec.clone(), values })
            }
            Observable::Wigner(grid) => {
                let rho = self.density_matrix();
                ObservableData::Wigner(grid.evaluate(|pt| wigner_density(&rho, pt)))
            }
            Observable::PhotonDistribution => {
                let dim = self.members.iter().map(|m| m.state.dim()).max().unwrap_or(1);
                let mut out = vec![0.0; dim];
                for mem in &self.members {
                    for (o, a) in out.iter_mut().zip(mem.state.amps()) {
                        *o += mem.weight * a.norm_sqr();
                    }
                }
                ObservableData::PhotonDistribution(out)
            }
        }
    }
}

fn scaled(v: Vec<f64>, w: f64) -> Vec<f64> {
    v.into_iter().map(|x| x * w).collect()
}

fn add(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
    a
}

/// Histogram of click counts `0..=N` from `samples` trials with `m` photons:
/// each photon survives with probability `η` and lands on a uniformly chosen
/// diode; a diode clicks when at least one photon reaches it.
pub fn sample_clicks(det: &DetectorModel, m: usize, samples: usize, seed: u64) -> Result<Vec<u64>> {
    if det.diodes > 128 {
        return Err(Error::invalid("Monte-Carlo sampler supports at most 128 diodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thin = Binomial::new(m as u64, det.eta).map_err(|e| Error::invalid(e.to_string()))?;
    let mut hist = vec![0u64; det.diodes + 1];
    for _ in 0..samples {
        let survivors = thin.sample(&mut rng);
        let mut hit: u128 = 0;
        for _ in 0..survivors {
            hit |= 1u128 << rng.random_range(0..det.diodes);
        }
        hist[hit.count_ones() as usize] += 1;
    }
    Ok(hist)
}

/// `Σ_l (−1)^l C(k,l) (k−l)^m = k! S(m,k)`, the number of surjections from
/// `m` photons onto `k` diodes.
pub fn surjection_count(m: usize, k: usize) -> BigInt {
    let mut s = BigInt::zero();
    for l in 0..=k {
        let term = big_binomial(k, l) * BigInt::from(k - l).pow(m as u32);
        if l % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    s
}
