//! Run configuration shared by every subcommand, merged from flags, an
//! optional TOML file and per-command defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use jpstate::beamsplitter::{BeamSplitterParams, ConditionalIndices};
use jpstate::detection::{binomial_mixture, DetectorModel, EnsembleWeighting, FockMixture};
use jpstate::fock::{CoherentParams, SqueezeParams};
use jpstate::phasespace::{linspace, PhaseGrid};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Coherent,
    Squeezed,
    Fock,
    /// Fock amplitudes read from a JSON file.
    MixtureFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Member weights of a mixed conditional output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Ancilla weight times the per-ancilla posterior.
    Posterior,
    /// Joint posterior over ancilla and detected photon numbers.
    Joint,
}

impl From<Weighting> for EnsembleWeighting {
    fn from(w: Weighting) -> Self {
        match w {
            Weighting::Posterior => EnsembleWeighting::Posterior,
            Weighting::Joint => EnsembleWeighting::Joint,
        }
    }
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

macro_rules! run_config {
    ($($(#[$meta:meta])* $field:ident: $ty:ty,)*) => {
        /// Every field is optional so that flags, the config file and the
        /// command defaults can be layered.
        #[derive(Debug, Clone, Default, Args, Deserialize)]
        #[serde(rename_all = "kebab-case", deny_unknown_fields)]
        pub struct RunConfig {
            $($(#[$meta])* #[arg(long, allow_negative_numbers = true)] pub $field: Option<$ty>,)*
        }

        impl RunConfig {
            /// Fields set in `self` win over those in `lower`.
            pub fn over(self, lower: RunConfig) -> RunConfig {
                RunConfig { $($field: self.$field.or(lower.$field),)* }
            }
        }
    };
}

run_config! {
    /// Input state of mode 1.
    input: InputKind,
    /// Coherent amplitude |β|.
    beta: f64,
    /// Phase of β.
    beta_phase: f64,
    /// Squeezing magnitude |ξ|.
    xi: f64,
    /// Phase of ξ.
    xi_phase: f64,
    /// Fock input |k⟩.
    fock: usize,
    /// JSON file with the input Fock amplitudes.
    input_file: PathBuf,
    /// Photons fed into mode 2.
    n: usize,
    /// Photons detected in mode 2.
    m: usize,
    /// Clicks registered by the chopping detector.
    clicks: usize,
    /// Intensity transmittance |T|².
    t2: f64,
    /// Phase of T.
    phi_t: f64,
    /// Phase of R.
    phi_r: f64,
    /// Number of on/off diodes.
    diodes: usize,
    /// Detection efficiency.
    eta: f64,
    /// Mean-defining ancilla photon number of the binomial mixture.
    n0: usize,
    /// Binomial success probability of the ancilla mixture.
    p: f64,
    /// Member weights of a mixed output.
    weighting: Weighting,
    /// Largest photon number considered in mode 2.
    m_max: usize,
    /// Lower edge of the phase-space grid.
    grid_min: f64,
    /// Upper edge of the phase-space grid.
    grid_max: f64,
    /// Points per phase-space axis.
    points: usize,
    /// Quadrature phase; overrides the phase sweep.
    phi: f64,
    /// Quadrature phases sampled over [0, π].
    phi_points: usize,
    /// Largest |β| of a probability sweep.
    sweep_max: f64,
    /// Points of a probability sweep.
    sweep_points: usize,
    /// Seed for Monte-Carlo checks.
    seed: u64,
    /// Monte-Carlo samples per check.
    samples: usize,
    /// Output format.
    format: Format,
    /// Output file.
    out: PathBuf,
}

/// Mode-1 input as requested by the configuration.
#[derive(Debug, Clone)]
pub enum InputSpec {
    Coherent(CoherentParams<f64>),
    Squeezed(SqueezeParams<f64>),
    Fock(usize),
    File(PathBuf),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn input(&self) -> Result<InputSpec, CliError> {
        let given: Vec<InputKind> = [
            (self.beta.is_some(), InputKind::Coherent),
            (self.xi.is_some(), InputKind::Squeezed),
            (self.fock.is_some(), InputKind::Fock),
            (self.input_file.is_some(), InputKind::MixtureFile),
        ]
        .into_iter()
        .filter_map(|(set, k)| set.then_some(k))
        .collect();
        let kind = match (self.input, given.as_slice()) {
            (Some(k), g) if g.iter().all(|x| *x == k) => k,
            (None, [k]) => *k,
            (None, []) => return Err(usage("no input state given (use --beta, --xi, --fock or --input-file)")),
            _ => return Err(usage("exactly one input kind may be given")),
        };
        Ok(match kind {
            InputKind::Coherent => {
                let abs = self.beta.ok_or_else(|| usage("--beta is required for a coherent input"))?;
                non_negative("--beta", abs)?;
                InputSpec::Coherent(CoherentParams::polar(abs, self.beta_phase.unwrap_or(0.0)))
            }
            InputKind::Squeezed => {
                let r = self.xi.ok_or_else(|| usage("--xi is required for a squeezed input"))?;
                non_negative("--xi", r)?;
                InputSpec::Squeezed(SqueezeParams::polar(r, self.xi_phase.unwrap_or(0.0)))
            }
            InputKind::Fock => InputSpec::Fock(self.fock.ok_or_else(|| usage("--fock is required for a Fock input"))?),
            InputKind::MixtureFile => {
                InputSpec::File(self.input_file.clone().ok_or_else(|| usage("--input-file is required"))?)
            }
        })
    }

    pub fn beam_splitter(&self) -> Result<BeamSplitterParams<f64>, CliError> {
        let t2 = self.t2.ok_or_else(|| usage("--t2 is required"))?;
        if !(t2 > 0.0 && t2 < 1.0) {
            return Err(usage(format!("--t2 = {t2} must lie in (0, 1)")));
        }
        BeamSplitterParams::from_transmittance_phases(t2, self.phi_t.unwrap_or(0.0), self.phi_r.unwrap_or(0.0))
            .map_err(CliError::from)
    }

    pub fn n(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| usage("--n is required"))
    }

    pub fn indices(&self) -> Result<ConditionalIndices, CliError> {
        let m = self.m.ok_or_else(|| usage("--m is required"))?;
        Ok(ConditionalIndices::new(self.n()?, m))
    }

    pub fn clicks(&self) -> Result<usize, CliError> {
        self.clicks.ok_or_else(|| usage("--clicks is required"))
    }

    pub fn detector(&self) -> Result<DetectorModel, CliError> {
        let diodes = self.diodes.ok_or_else(|| usage("--diodes is required"))?;
        DetectorModel::new(diodes, self.eta.unwrap_or(1.0)).map_err(CliError::from)
    }

    pub fn mixture(&self) -> Result<FockMixture, CliError> {
        let n0 = self.n0.ok_or_else(|| usage("--n0 is required"))?;
        binomial_mixture(n0, self.p.unwrap_or(1.0)).map_err(CliError::from)
    }

    pub fn grid(&self) -> Result<PhaseGrid, CliError> {
        let (lo, hi) = (self.grid_min.unwrap_or(-6.0), self.grid_max.unwrap_or(6.0));
        PhaseGrid::square(lo, hi, self.points.unwrap_or(121)).map_err(CliError::from)
    }

    pub fn xs(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi) = (self.grid_min.unwrap_or(-6.0), self.grid_max.unwrap_or(6.0));
        linspace(lo, hi, self.points.unwrap_or(121)).map_err(CliError::from)
    }

    /// A single phase if `--phi` is set, otherwise `phi_points` phases over `[0, π]`.
    pub fn phis(&self) -> Result<Vec<f64>, CliError> {
        match (self.phi, self.phi_points) {
            (Some(phi), _) => Ok(vec![phi]),
            (None, Some(k)) => linspace(0.0, std::f64::consts::PI, k).map_err(CliError::from),
            (None, None) => Ok(vec![0.0]),
        }
    }

    pub fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn non_negative(flag: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(usage(format!("{flag} = {x} must be a non-negative number")))
    }
}
