//! Subcommand implementations. Each builds its data, serializes it in the
//! requested format and hands the bytes to [`output::emit`].

use clap::ValueEnum;
use serde::Serialize;

use jpstate::beamsplitter::{probability_direct, probability_map, ConditionalIndices, UNREACHABLE_PROBABILITY};
use jpstate::detection::{
    click_given_photons, coherent_m_max, mixed_conditional_output, posterior_photons_given_clicks, ConditionalEnsemble,
    EnsembleWeighting, Observable, ObservableData,
};
use jpstate::fock::{coherent_state, squeezed_dim, squeezed_vacuum, FockVector};
use jpstate::jpstates::{coherent_dim_for, jp_state_general, psjp_pajp_coherent, psjp_pajp_squeezed};
use jpstate::phasespace::{
    husimi_numeric, quadrature_dist_numeric, wigner_numeric, CoherentClosedForm, GridValues, QuadratureSpec,
};
use jpstate::statistics::{
    photon_stats_closed, probability_closed_coherent, probability_sweep, write_sweep_csv, PhotonStats,
};
use jpstate::verify::{run_suite, Suite, SuiteReport, VerifyOptions};
use jpstate::Error;

use crate::config::{Format, InputSpec, RunConfig};
use crate::error::CliError;
use crate::output::{csv_rows, csv_with, destination, emit, json};

fn write(
    cfg: &RunConfig,
    stem: &str,
    default: Format,
    csv: impl FnOnce() -> Result<Vec<u8>, CliError>,
    js: impl FnOnce() -> Result<Vec<u8>, CliError>,
) -> Result<(), CliError> {
    let format = cfg.format(default);
    let bytes = match format {
        Format::Csv => csv()?,
        Format::Json => js()?,
    };
    emit(destination(cfg, stem, format), &bytes)
}

/// Mode-1 state in a basis adequate for the outcome `idx`.
fn input_vector(spec: &InputSpec, idx: ConditionalIndices) -> Result<FockVector<f64>, CliError> {
    Ok(match spec {
        InputSpec::Coherent(p) => coherent_state(p, coherent_dim_for(p, idx))?,
        InputSpec::Squeezed(p) => squeezed_vacuum(p, squeezed_dim(p, idx.n, idx.m))?,
        InputSpec::Fock(k) => FockVector::basis(k + 1, *k),
        InputSpec::File(path) => {
            let text = std::fs::read_to_string(path)?;
            FockVector::from_json(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
                .normalize()?
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalReport {
    pub n: usize,
    pub m: usize,
    pub nu: i64,
    pub probability: f64,
    pub normalization: f64,
    /// `[re, im]` of each Fock amplitude.
    pub amplitudes: Vec<[f64; 2]>,
}

/// Conditional state from the closed-form constructor matching the input kind.
pub fn conditional_state(cfg: &RunConfig) -> Result<(ConditionalReport, FockVector<f64>), CliError> {
    let spec = cfg.input()?;
    let bs = cfg.beam_splitter()?;
    let idx = cfg.indices()?;
    let vector = input_vector(&spec, idx)?;
    let probability = match &spec {
        InputSpec::Coherent(p) => probability_closed_coherent(p, idx, &bs)?,
        _ => probability_direct(&vector.distribution(), idx.n, idx.m, &bs),
    };
    if probability.is_nan() || probability < UNREACHABLE_PROBABILITY {
        return Err(Error::Unreachable { probability }.into());
    }
    let prepared = match &spec {
        InputSpec::Coherent(p) => psjp_pajp_coherent(p, idx, &bs, vector.dim() + idx.n)?,
        InputSpec::Squeezed(p) => psjp_pajp_squeezed(p, idx, &bs, vector.dim() + idx.n)?,
        _ => jp_state_general(&vector, idx, &bs)?,
    };
    let report = ConditionalReport {
        n: idx.n,
        m: idx.m,
        nu: idx.nu(),
        probability,
        normalization: prepared.normalization,
        amplitudes: prepared.state.amps().iter().map(|a| [a.re, a.im]).collect(),
    };
    Ok((report, prepared.state))
}

pub fn conditional(cfg: &RunConfig) -> Result<(), CliError> {
    let (report, _) = conditional_state(cfg)?;
    write(
        cfg,
        "conditional",
        Format::Json,
        || {
            csv_rows(
                &["k", "re", "im", "normalization", "probability"],
                report
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(k, a)| vec![k as f64, a[0], a[1], report.normalization, report.probability]),
            )
        },
        || json(&report),
    )
}

#[derive(Serialize)]
struct ProbabilityMap {
    n: usize,
    probabilities: Vec<f64>,
}

pub fn prob_map(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.input()?;
    let bs = cfg.beam_splitter()?;
    let n = cfg.n()?;
    let m_max = cfg.m_max.unwrap_or(10);
    let vector = input_vector(&spec, ConditionalIndices::new(n, m_max))?;
    let map = ProbabilityMap { n, probabilities: probability_map(&vector, n, &bs, m_max)? };
    write(
        cfg,
        "prob-map",
        Format::Csv,
        || csv_rows(&["m", "probability"], map.probabilities.iter().enumerate().map(|(m, p)| vec![m as f64, *p])),
        || json(&map),
    )
}

#[derive(Serialize)]
struct QuadratureTable {
    xs: Vec<f64>,
    phis: Vec<f64>,
    /// One row of values per phase.
    values: Vec<Vec<f64>>,
}

impl QuadratureTable {
    fn emit(&self, cfg: &RunConfig, stem: &str) -> Result<(), CliError> {
        write(
            cfg,
            stem,
            Format::Csv,
            || {
                let rows = self
                    .phis
                    .iter()
                    .zip(&self.values)
                    .flat_map(|(phi, row)| self.xs.iter().zip(row).map(move |(x, v)| vec![*x, *phi, *v]));
                csv_rows(&["x", "phi", "value"], rows)
            },
            || json(self),
        )
    }
}

pub fn quadrature(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, state) = conditional_state(cfg)?;
    let (xs, phis) = (cfg.xs()?, cfg.phis()?);
    let values = phis
        .iter()
        .map(|&phi| Ok(quadrature_dist_numeric(&state, &QuadratureSpec::new(phi, xs.clone())?).values))
        .collect::<Result<Vec<_>, CliError>>()?;
    QuadratureTable { xs, phis, values }.emit(cfg, "quadrature")
}

fn emit_grid(cfg: &RunConfig, stem: &str, values: &GridValues) -> Result<(), CliError> {
    write(cfg, stem, Format::Csv, || csv_with(|b| values.write_csv(b)), || json(values))
}

pub fn wigner(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, state) = conditional_state(cfg)?;
    emit_grid(cfg, "wigner", &cfg.grid()?.evaluate(|pt| wigner_numeric(&state, pt)))
}

pub fn husimi(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, state) = conditional_state(cfg)?;
    emit_grid(cfg, "husimi", &cfg.grid()?.evaluate(|pt| husimi_numeric(&state, pt)))
}

pub fn photon_stats(cfg: &RunConfig) -> Result<(), CliError> {
    let stats = match cfg.input()? {
        InputSpec::Coherent(p) => photon_stats_closed(&p, cfg.indices()?, &cfg.beam_splitter()?)?,
        _ => PhotonStats::from_vector(&conditional_state(cfg)?.1),
    };
    write(
        cfg,
        "photon-stats",
        Format::Json,
        || {
            let var = stats.variance();
            csv_rows(
                &["l", "probability", "mean", "variance", "mandel_q"],
                stats.distribution.iter().enumerate().map(|(l, p)| vec![l as f64, *p, stats.mean, var, stats.mandel_q]),
            )
        },
        || json(&stats),
    )
}

#[derive(Serialize)]
struct ClickMatrix {
    diodes: usize,
    eta: f64,
    /// `rows[k][m] = P̃(k|m)`.
    rows: Vec<Vec<f64>>,
}

pub fn chopping(cfg: &RunConfig) -> Result<(), CliError> {
    let det = cfg.detector()?;
    let m_max = cfg.m_max.unwrap_or(10);
    let mat = click_given_photons(&det, m_max);
    let table = ClickMatrix {
        diodes: det.diodes,
        eta: det.eta,
        rows: mat.row_iter().map(|r| r.iter().copied().collect()).collect(),
    };
    write(
        cfg,
        "chopping",
        Format::Csv,
        || {
            let rows = table
                .rows
                .iter()
                .enumerate()
                .flat_map(|(k, row)| row.iter().enumerate().map(move |(m, p)| vec![k as f64, m as f64, *p]));
            csv_rows(&["k", "m", "probability"], rows)
        },
        || json(&table),
    )
}

pub fn posterior(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.input()?;
    let (n, k) = (cfg.n()?, cfg.clicks()?);
    let m_max = cfg.m_max.unwrap_or_else(|| default_m_max(&spec, n));
    let vector = input_vector(&spec, ConditionalIndices::new(n, m_max))?;
    let post = posterior_photons_given_clicks(&cfg.detector()?, &vector, n, &cfg.beam_splitter()?, k)?;
    write(cfg, "posterior", Format::Csv, || csv_with(|b| post.write_csv(b)), || json(&post))
}

fn default_m_max(spec: &InputSpec, n: usize) -> usize {
    match spec {
        InputSpec::Coherent(p) => coherent_m_max(n, p.beta.norm()),
        _ => 40,
    }
}

/// Mixed output for a coherent or Fock-space input and a binomial ancilla mixture.
pub fn ensemble(cfg: &RunConfig) -> Result<ConditionalEnsemble, CliError> {
    let spec = cfg.input()?;
    let mix = cfg.mixture()?;
    let n_max = mix.weights().len() - 1;
    let m_max = cfg.m_max.unwrap_or_else(|| default_m_max(&spec, n_max));
    let vector = input_vector(&spec, ConditionalIndices::new(n_max, m_max))?;
    let weighting = cfg.weighting.map_or(EnsembleWeighting::default(), EnsembleWeighting::from);
    Ok(mixed_conditional_output(&vector, &mix, &cfg.beam_splitter()?, &cfg.detector()?, cfg.clicks()?, weighting)?)
}

#[derive(Serialize)]
struct MemberRow {
    n: usize,
    m: usize,
    weight: f64,
}

#[derive(Serialize)]
struct MixtureReport {
    total_probability: f64,
    members: Vec<MemberRow>,
    photon_distribution: Vec<f64>,
}

pub fn mixture(cfg: &RunConfig) -> Result<(), CliError> {
    let ens = ensemble(cfg)?;
    let photon_distribution = match ens.observable(&Observable::PhotonDistribution) {
        ObservableData::PhotonDistribution(d) => d,
        _ => unreachable!("photon distribution requested"),
    };
    let report = MixtureReport {
        total_probability: ens.total_probability,
        members: ens.members.iter().map(|m| MemberRow { n: m.n, m: m.m, weight: m.weight }).collect(),
        photon_distribution,
    };
    write(
        cfg,
        "mixture",
        Format::Json,
        || csv_rows(&["n", "m", "weight"], report.members.iter().map(|r| vec![r.n as f64, r.m as f64, r.weight])),
        || json(&report),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    #[value(name = "2a")]
    Fig2a,
    #[value(name = "2b")]
    Fig2b,
    #[value(name = "3a")]
    Fig3a,
    #[value(name = "3b")]
    Fig3b,
    #[value(name = "4a")]
    Fig4a,
    #[value(name = "4b")]
    Fig4b,
    #[value(name = "5a")]
    Fig5a,
    #[value(name = "5b")]
    Fig5b,
    #[value(name = "8a")]
    Fig8a,
    #[value(name = "8b")]
    Fig8b,
}

impl Figure {
    pub fn stem(&self) -> String {
        format!("fig{}", self.to_possible_value().expect("no skipped variants").get_name())
    }

    /// Parameters stated for the figure in the source text.
    pub fn defaults(&self) -> RunConfig {
        use Figure::*;
        let base = RunConfig {
            beta: Some(2.3),
            t2: Some(0.81),
            points: Some(121),
            grid_min: Some(-6.0),
            grid_max: Some(6.0),
            ..Default::default()
        };
        let (n, m) = match self {
            Fig3b | Fig4b | Fig5b => (3, 2),
            _ => (2, 3),
        };
        match self {
            Fig2a | Fig2b => RunConfig {
                t2: Some(if *self == Fig2a { 0.4 } else { 0.81 }),
                sweep_max: Some(5.0),
                sweep_points: Some(201),
                ..base
            },
            Fig3a | Fig3b => RunConfig { n: Some(n), m: Some(m), phi_points: Some(61), ..base },
            Fig4a | Fig4b | Fig5a | Fig5b => RunConfig { n: Some(n), m: Some(m), ..base },
            Fig8a | Fig8b => RunConfig {
                clicks: Some(4),
                diodes: Some(20),
                eta: Some(0.9),
                n0: Some(4),
                p: Some(0.95),
                phi_points: Some(61),
                ..base
            },
        }
    }
}

fn closed_form(cfg: &RunConfig) -> Result<CoherentClosedForm, CliError> {
    match cfg.input()? {
        InputSpec::Coherent(p) => Ok(CoherentClosedForm::new(&p, cfg.indices()?, &cfg.beam_splitter()?)?),
        _ => Err(CliError::Usage("figures 3 to 5 use a coherent input".into())),
    }
}

pub fn figure(fig: Figure, cfg: &RunConfig) -> Result<(), CliError> {
    use Figure::*;
    let stem = fig.stem();
    match fig {
        Fig2a | Fig2b => {
            let t2 = cfg.t2.expect("figure default");
            cfg.beam_splitter()?;
            let betas =
                jpstate::phasespace::linspace(0.0, cfg.sweep_max.unwrap_or(5.0), cfg.sweep_points.unwrap_or(201))?;
            let rows = probability_sweep(&betas, &[(2, 3), (3, 2)], &[t2])?;
            write(cfg, &stem, Format::Csv, || csv_with(|b| write_sweep_csv(b, &rows)), || json(&rows))
        }
        Fig3a | Fig3b => {
            let cf = closed_form(cfg)?;
            let (xs, phis) = (cfg.xs()?, cfg.phis()?);
            let values = phis.iter().map(|&phi| xs.iter().map(|&x| cf.quadrature(x, phi)).collect()).collect();
            QuadratureTable { xs, phis, values }.emit(cfg, &stem)
        }
        Fig4a | Fig4b => {
            let cf = closed_form(cfg)?;
            emit_grid(cfg, &stem, &cfg.grid()?.evaluate(|pt| cf.husimi(pt)))
        }
        Fig5a | Fig5b => {
            let cf = closed_form(cfg)?;
            emit_grid(cfg, &stem, &cfg.grid()?.evaluate(|pt| cf.wigner(pt)))
        }
        Fig8a => {
            let ens = ensemble(cfg)?;
            let (xs, phis) = (cfg.xs()?, cfg.phis()?);
            let values = phis
                .iter()
                .map(|&phi| match ens.observable(&Observable::Quadrature(QuadratureSpec::new(phi, xs.clone())?)) {
                    ObservableData::Quadrature(c) => Ok(c.values),
                    _ => unreachable!("quadrature requested"),
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            QuadratureTable { xs, phis, values }.emit(cfg, &stem)
        }
        Fig8b => {
            let ens = ensemble(cfg)?;
            match ens.observable(&Observable::Wigner(cfg.grid()?)) {
                ObservableData::Wigner(g) => emit_grid(cfg, &stem, &g),
                _ => unreachable!("Wigner grid requested"),
            }
        }
    }
}

pub fn verify(suites: &[Suite], cfg: &RunConfig) -> Result<(), CliError> {
    let defaults = VerifyOptions::default();
    let opts =
        VerifyOptions { seed: cfg.seed.unwrap_or(defaults.seed), samples: cfg.samples.unwrap_or(defaults.samples) };
    let suites = if suites.is_empty() { Suite::ALL.to_vec() } else { suites.to_vec() };
    let reports = suites.iter().map(|s| run_suite(*s, &opts)).collect::<jpstate::Result<Vec<SuiteReport>>>()?;
    write(cfg, "verify", Format::Json, || verify_csv(&reports), || json(&reports))?;
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}", r.suite, c.name)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

fn verify_csv(reports: &[SuiteReport]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Numerical(Error::Serialization(e.to_string()));
    w.write_record(["suite", "check", "max_deviation", "tolerance", "cases", "passed"]).map_err(ser)?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.suite.to_string(),
                c.name.clone(),
                jpstate::export::fmt_f64(c.max_deviation),
                jpstate::export::fmt_f64(c.tolerance),
                c.cases.to_string(),
                c.passed.to_string(),
            ])
            .map_err(ser)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}
