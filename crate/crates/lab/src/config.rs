//! Experiment configuration, read from a single JSON document.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use index_lab_core::flows::{GeneratorOptions, TransportOptions};
use index_lab_core::models::{CdwParams, DimerizedParams, HarperHubbardParams, Interaction};
use index_lab_core::spectral::Interior;
use index_lab_core::transport::WindingOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Lsm,
    MagneticLsm,
    Hall,
    Adz,
    Additivity,
    Cluster,
    Sectors,
    Winding,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Lsm => "lsm",
            Scenario::MagneticLsm => "magnetic_lsm",
            Scenario::Hall => "hall",
            Scenario::Adz => "adz",
            Scenario::Additivity => "additivity",
            Scenario::Cluster => "cluster",
            Scenario::Sectors => "sectors",
            Scenario::Winding => "winding",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub d1: isize,
    pub d2: isize,
    pub u: f64,
}

fn one() -> f64 {
    1.0
}

fn one_i() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Harper-Hubbard model with piercing flux `2π m/n` and threaded flux.
    HarperHubbard {
        #[serde(default = "one")]
        t: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default)]
        interactions: Vec<InteractionConfig>,
        #[serde(default)]
        m: i64,
        #[serde(default = "one_i")]
        n: i64,
        #[serde(default)]
        flux: f64,
    },
    /// Ring with nearest-neighbor repulsion.
    Cdw {
        #[serde(default = "one")]
        t: f64,
        v: f64,
        #[serde(default)]
        mu: f64,
    },
    /// Dimerized chain or ladder with a staggered potential.
    Dimerized {
        #[serde(default = "one")]
        t1: f64,
        t2: f64,
        #[serde(default)]
        t_perp: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default)]
        u: f64,
        #[serde(default)]
        mu: f64,
    },
}

impl ModelConfig {
    pub fn is_free(&self) -> bool {
        match self {
            ModelConfig::HarperHubbard { interactions, .. } => interactions.iter().all(|i| i.u == 0.0),
            ModelConfig::Cdw { v, .. } => *v == 0.0,
            ModelConfig::Dimerized { u, .. } => *u == 0.0,
        }
    }

    pub fn harper(&self) -> Option<HarperHubbardParams> {
        match self {
            ModelConfig::HarperHubbard { t, mu, interactions, m, n, flux } => Some(HarperHubbardParams {
                t: *t,
                mu: *mu,
                interactions: interactions.iter().map(|i| Interaction { d1: i.d1, d2: i.d2, u: i.u }).collect(),
                m: *m,
                n: *n,
                flux: *flux,
            }),
            _ => None,
        }
    }

    pub fn cdw(&self) -> Option<CdwParams> {
        match self {
            ModelConfig::Cdw { t, v, mu } => Some(CdwParams { t: *t, v: *v, mu: *mu }),
            _ => None,
        }
    }

    pub fn dimerized(&self) -> Option<DimerizedParams> {
        match self {
            ModelConfig::Dimerized { t1, t2, t_perp, delta, u, mu } => {
                Some(DimerizedParams { t1: *t1, t2: *t2, t_perp: *t_perp, delta: *delta, u: *u, mu: *mu })
            }
            _ => None,
        }
    }
}

/// Particle number, either absolute or as a fraction of the sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Filling {
    Particles(usize),
    Fraction([usize; 2]),
}

impl Filling {
    pub fn particles(self, n_sites: usize) -> Result<usize> {
        match self {
            Filling::Particles(n) => Ok(n),
            Filling::Fraction([a, b]) => {
                if b == 0 || (n_sites * a) % b != 0 {
                    bail!("filling {a}/{b} of {n_sites} sites is not an integer particle number");
                }
                Ok(n_sites * a / b)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// One-particle route for free models at fixed filling, dense otherwise.
    #[default]
    Auto,
    Free,
    ManyBody,
}

/// A unitary of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitaryConfig {
    /// `Θ^power` along the transport direction.
    Translation {
        #[serde(default = "one_u")]
        power: usize,
    },
    /// Magnetic translation, raised to `power`.
    MagneticTranslation {
        #[serde(default = "one_u")]
        power: usize,
    },
    /// `F(Φ, Φ − 2π quanta/L2) 𝓕` at the configured flux.
    Flux {
        #[serde(default = "one_i")]
        quanta: i64,
    },
}

fn one_u() -> usize {
    1
}

impl UnitaryConfig {
    pub fn label(&self) -> String {
        match self {
            UnitaryConfig::Translation { power: 1 } => "translation".into(),
            UnitaryConfig::Translation { power } => format!("translation^{power}"),
            UnitaryConfig::MagneticTranslation { power: 1 } => "magnetic_translation".into(),
            UnitaryConfig::MagneticTranslation { power } => format!("magnetic_translation^{power}"),
            UnitaryConfig::Flux { quanta } => format!("flux[{quanta}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    /// Applied first.
    pub first: UnitaryConfig,
    pub second: UnitaryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Slab fraction `c` of `Λ_±`.
    pub c: f64,
    /// Overrides the split radius.
    pub split_radius: Option<usize>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { c: 0.25, split_radius: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum InteriorConfig {
    #[default]
    Smooth,
    Cubic,
}

impl From<InteriorConfig> for Interior {
    fn from(i: InteriorConfig) -> Self {
        match i {
            InteriorConfig::Smooth => Interior::Smooth,
            InteriorConfig::Cubic => Interior::Cubic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Fixes the rank of the ground-state patch.
    pub hint: Option<usize>,
    pub p_max: usize,
    pub interior: InteriorConfig,
    /// Filter threshold; defaults to the gap.
    pub gamma: Option<f64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { hint: None, p_max: 8, interior: InteriorConfig::Smooth, gamma: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub steps: usize,
    /// Local error estimate allowed per unit of flux.
    pub tol: f64,
    pub min_step: f64,
    /// Smallest admissible gap along a flux path.
    pub gap_floor: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        let t = TransportOptions::default();
        Self { steps: t.steps, tol: t.tol, min_step: t.min_step, gap_floor: GeneratorOptions::default().gap_floor }
    }
}

impl TransportConfig {
    pub fn options(&self) -> TransportOptions {
        TransportOptions { steps: self.steps, tol: self.tol, min_step: self.min_step }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct WindingConfig {
    pub grid: usize,
    pub max_jump: f64,
    pub max_points: usize,
}

impl Default for WindingConfig {
    fn default() -> Self {
        let w = WindingOptions::default();
        Self { grid: w.grid, max_jump: w.max_jump, max_points: w.max_points }
    }
}

impl WindingConfig {
    pub fn options(&self) -> WindingOptions {
        WindingOptions { grid: self.grid, max_jump: self.max_jump, max_points: self.max_points }
    }
}

/// Thresholds of the hard assertions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Pass threshold for `dist(p Ind, ℤ)`; per-scenario default when unset.
    pub integer_distance: Option<f64>,
    /// Sizes at which the integer-distance threshold is enforced; all when unset.
    pub assert_sizes: Option<Vec<[usize; 2]>>,
    /// Makes the non-increasing trend over sizes a hard assertion.
    pub monotone_hard: bool,
    /// `‖[U, P]‖` and similar symmetry residuals.
    pub symmetry: f64,
    /// Pairs of exactly evaluable unitaries.
    pub additivity_exact: f64,
    /// Pairs involving parallel transport.
    pub additivity_transport: f64,
    pub power_identity: f64,
    pub cocycle: f64,
    pub winding: f64,
    pub winding_det: f64,
    pub dressed_commutator: f64,
    /// Spectral against time-integral `K`.
    pub k_routes: f64,
    pub clustering_identities: f64,
    /// Largest wall time per size in seconds.
    pub max_seconds: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integer_distance: None,
            assert_sizes: None,
            monotone_hard: false,
            symmetry: 1e-8,
            additivity_exact: 1e-6,
            additivity_transport: 0.05,
            power_identity: 1e-6,
            cocycle: 1e-7,
            winding: 0.02,
            winding_det: 0.05,
            dressed_commutator: 1e-10,
            k_routes: 1e-6,
            clustering_identities: 1e-10,
            max_seconds: None,
        }
    }
}

impl Tolerances {
    pub fn integer_distance_for(&self, scenario: Scenario) -> f64 {
        self.integer_distance.unwrap_or(match scenario {
            Scenario::MagneticLsm => 0.05,
            Scenario::Adz => 0.1,
            Scenario::Hall => 0.1,
            _ => 0.02,
        })
    }

    pub fn enforced_at(&self, l1: usize, l2: usize) -> bool {
        self.assert_sizes.as_ref().is_none_or(|s| s.contains(&[l1, l2]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub model: ModelConfig,
    /// Lattice sizes `[L1, L2]`.
    pub sizes: Vec<[usize; 2]>,
    /// Fixed particle number; the full Fock space when unset.
    #[serde(default)]
    pub filling: Option<Filling>,
    #[serde(default)]
    pub solver: Solver,
    /// Unitary of the lsm, hall, winding and sectors scenarios.
    #[serde(default)]
    pub unitary: Option<UnitaryConfig>,
    /// Pairs of the additivity scenario.
    #[serde(default)]
    pub pairs: Vec<PairConfig>,
    /// Separations of the cluster scenario.
    #[serde(default)]
    pub separations: Vec<usize>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub winding: WindingConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Writes `A` and `T_−` of the first size as COO text.
    #[serde(default)]
    pub export_operators: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing the experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn generator_options(&self) -> GeneratorOptions {
        GeneratorOptions {
            interior: self.spectral.interior.into(),
            gamma: self.spectral.gamma,
            gap_floor: self.transport.gap_floor,
        }
    }

    /// Scenario-specific completeness checks, run before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            bail!("no lattice sizes given");
        }
        for &[l1, l2] in &self.sizes {
            if l1 < 4 || l2 == 0 {
                bail!("size {l1}x{l2}: need L1 >= 4 and L2 >= 1");
            }
        }
        if self.transport.steps == 0 || !(self.transport.tol > 0.0) || !(self.transport.min_step > 0.0) {
            bail!("transport settings must be positive");
        }
        if !(self.geometry.c >= 0.0) {
            bail!("geometry.c must be non-negative");
        }
        if self.solver == Solver::Free && !self.model.is_free() {
            bail!("the free solver needs a model without interactions");
        }
        if self.solver == Solver::Free && self.filling.is_none() {
            bail!("the free solver needs a filling");
        }
        let harper = self.model.harper().is_some();
        let needs_flux = |u: &UnitaryConfig| matches!(u, UnitaryConfig::Flux { .. } | UnitaryConfig::MagneticTranslation { .. });
        match self.scenario {
            Scenario::Lsm => {
                if let Some(u) = &self.unitary {
                    if !matches!(u, UnitaryConfig::Translation { .. }) {
                        bail!("lsm takes a translation unitary");
                    }
                }
            }
            Scenario::MagneticLsm | Scenario::Adz => {
                if !harper {
                    bail!("{} needs the harper_hubbard model", self.scenario.name());
                }
                if self.filling.is_none() {
                    bail!("{} needs a filling", self.scenario.name());
                }
            }
            Scenario::Hall => {
                if !harper {
                    bail!("hall needs the harper_hubbard model");
                }
                if let Some(u) = &self.unitary {
                    if !matches!(u, UnitaryConfig::Flux { .. }) {
                        bail!("hall takes a flux unitary");
                    }
                }
            }
            Scenario::Additivity => {
                if self.pairs.is_empty() {
                    bail!("additivity needs at least one pair");
                }
                if !harper && self.pairs.iter().any(|p| needs_flux(&p.first) || needs_flux(&p.second)) {
                    bail!("flux and magnetic translations need the harper_hubbard model");
                }
            }
            Scenario::Cluster => {
                if self.separations.is_empty() {
                    bail!("cluster needs separations");
                }
            }
            Scenario::Sectors => {
                if self.model.cdw().is_none() {
                    bail!("sectors needs the cdw model");
                }
            }
            Scenario::Winding => {
                if self.solver == Solver::Free {
                    bail!("winding runs on the many-body route only");
                }
                if let Some(u) = &self.unitary {
                    if needs_flux(u) && !harper {
                        bail!("flux and magnetic translations need the harper_hubbard model");
                    }
                }
            }
        }
        if let Some(p) = self.model.harper() {
            if p.n <= 0 {
                bail!("flux denominator n must be positive");
            }
        }
        Ok(())
    }
}

/// JSON schema of the configuration.
pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"scenario": "lsm", "model": {"kind": "harper_hubbard", "t": 0.0, "mu": 1.0}, "sizes": [[4, 2]]}"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.scenario, Scenario::Lsm);
        assert_eq!(cfg.transport.steps, 16);
        assert!(cfg.model.is_free());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = MINIMAL.replace("\"sizes\"", "\"colour\": 1, \"sizes\"");
        assert!(ExperimentConfig::from_json(&top).is_err());
        let nested = MINIMAL.replace("\"mu\": 1.0", "\"mu\": 1.0, \"spin\": 2");
        assert!(ExperimentConfig::from_json(&nested).is_err());
        let deeper = MINIMAL.replace("\"sizes\"", "\"transport\": {\"steps\": 4, \"order\": 2}, \"sizes\"");
        assert!(ExperimentConfig::from_json(&deeper).is_err());
    }

    #[test]
    fn fillings() {
        assert_eq!(Filling::Fraction([1, 3]).particles(36).unwrap(), 12);
        assert!(Filling::Fraction([1, 3]).particles(8).is_err());
        assert_eq!(Filling::Particles(5).particles(8).unwrap(), 5);
    }

    #[test]
    fn scenario_checks() {
        let bad = MINIMAL.replace("\"lsm\"", "\"sectors\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = MINIMAL.replace("[[4, 2]]", "[[3, 2]]");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn schema_lists_scenarios() {
        let s = schema().to_string();
        assert!(s.contains("magnetic_lsm") && s.contains("additivity"));
    }
}
