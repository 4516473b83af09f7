use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Section;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Star,
    Laplace,
    GeometryCheck,
    Projector,
    Toeplitz,
    Commutator,
    NormLaw,
    Support,
    VerifySymbolProduct,
    All,
}

impl Suite {
    pub const EACH: [Suite; 9] = [
        Suite::Star,
        Suite::Laplace,
        Suite::GeometryCheck,
        Suite::Projector,
        Suite::Toeplitz,
        Suite::Commutator,
        Suite::NormLaw,
        Suite::Support,
        Suite::VerifySymbolProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Star => "star",
            Suite::Laplace => "laplace",
            Suite::GeometryCheck => "geometry-check",
            Suite::Projector => "projector",
            Suite::Toeplitz => "toeplitz",
            Suite::Commutator => "commutator",
            Suite::NormLaw => "norm-law",
            Suite::Support => "support",
            Suite::VerifySymbolProduct => "verify-symbol-product",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        match s {
            "build-projector" => Ok(Suite::Projector),
            _ => Suite::EACH
                .iter()
                .chain(std::iter::once(&Suite::All))
                .find(|x| x.name() == s)
                .copied()
                .ok_or_else(|| Error::Config(format!("unknown suite '{s}'"))),
        }
    }

    /// Ladder used when the configuration leaves it empty.
    pub fn default_ladder(self) -> Vec<u32> {
        match self {
            Suite::Star | Suite::All => vec![],
            Suite::Laplace => vec![4, 16, 64],
            Suite::GeometryCheck => vec![8, 16],
            Suite::Projector => vec![8, 12, 16, 24, 32],
            Suite::Toeplitz => vec![16, 24, 32, 40, 48, 56, 64],
            Suite::Commutator | Suite::NormLaw | Suite::Support => vec![16, 24, 32, 48, 64],
            Suite::VerifySymbolProduct => vec![8, 16, 32, 64],
        }
    }

    pub fn default_models(self) -> Vec<Model> {
        match self {
            Suite::GeometryCheck => vec![Model::Torus, Model::Sphere, Model::Patch],
            Suite::Projector | Suite::NormLaw => vec![Model::Torus, Model::Sphere],
            Suite::VerifySymbolProduct => vec![Model::Patch],
            Suite::Toeplitz | Suite::Commutator | Suite::Support => vec![Model::Torus],
            Suite::Star | Suite::Laplace | Suite::All => vec![],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Torus,
    Sphere,
    Patch,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Torus => "torus",
            Model::Sphere => "sphere",
            Model::Patch => "patch",
        }
    }

    pub fn parse(s: &str) -> Result<Model> {
        match s {
            "torus" => Ok(Model::Torus),
            "sphere" => Ok(Model::Sphere),
            "patch" | "bargmann-patch" => Ok(Model::Patch),
            _ => Err(Error::Config(format!("unknown model '{s}'"))),
        }
    }
}

/// A k ladder given either as an explicit list or as an arithmetic range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LadderSpec {
    List(Vec<u32>),
    Range { from: u32, to: u32, step: u32 },
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec::List(Vec::new())
    }
}

impl LadderSpec {
    pub fn values(&self) -> Result<Vec<u32>> {
        let v = match self {
            LadderSpec::List(v) => v.clone(),
            LadderSpec::Range { from, to, step } => {
                if *step == 0 {
                    return Err(Error::Config("ladder step must be positive".into()));
                }
                (*from..=*to).step_by(*step as usize).collect()
            }
        };
        if let Some(w) = v.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("k ladder must be strictly increasing, found {} then {}", w[0], w[1])));
        }
        if v.first() == Some(&0) {
            return Err(Error::Config("k ladder entries must be positive".into()));
        }
        Ok(v)
    }

    /// Parses "8,16,32" or "8..64:8".
    pub fn parse(s: &str) -> Result<LadderSpec> {
        let bad = || Error::Config(format!("malformed k ladder '{s}'"));
        if let Some((a, rest)) = s.split_once("..") {
            let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let p = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
            let spec = LadderSpec::Range { from: p(a)?, to: p(b)?, step: p(step)? };
            spec.values()?;
            return Ok(spec);
        }
        let v = s.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        let spec = LadderSpec::List(v);
        spec.values()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    /// Fixed torus resolution; chosen per k from the guard when absent.
    pub torus_n: Option<usize>,
    /// Fixed sphere resolution (θ and φ); chosen per k when absent.
    pub sphere_n: Option<usize>,
    /// Patch radius in units of k^{−1/2}.
    pub patch_radius: f64,
    /// Radius of the compared inner block in units of k^{−1/2}.
    pub patch_inner: f64,
    pub max_nodes: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { torus_n: None, sphere_n: None, patch_radius: 7.0, patch_inner: 1.5, max_nodes: 5000 }
    }
}

/// Thresholds for every assertion. Orders are magnitudes: `commutator_order = 0.5` asks for
/// decay at least as fast as k^{−1/2}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: f64,
    pub expansion_slope: f64,
    pub idempotency: f64,
    pub hermitian: f64,
    pub gap_ratio: f64,
    pub chi_order: f64,
    pub covariant_order: f64,
    pub order_fit: f64,
    pub floor: f64,
    pub norm_relative: f64,
    pub norm_growth: f64,
    pub commutator_order: f64,
    pub symbol_order: f64,
    pub support_order: f64,
    pub closure: f64,
    pub symbol_fit: f64,
    pub positivity: f64,
    pub normalized_order: f64,
    pub e_conditions: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-8,
            expansion_slope: 0.15,
            idempotency: 1e-9,
            hermitian: 1e-12,
            gap_ratio: 3.0,
            chi_order: 0.2,
            covariant_order: 1.0,
            order_fit: 1e-6,
            floor: 1e-10,
            norm_relative: 1e-2,
            norm_growth: 0.1,
            commutator_order: 0.5,
            symbol_order: 0.5,
            support_order: 3.0,
            closure: 1e-9,
            symbol_fit: 5e-3,
            positivity: 1e-10,
            normalized_order: 0.5,
            e_conditions: 2e-2,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let v = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        for (name, x) in v.as_object().into_iter().flatten() {
            match x.as_f64() {
                Some(t) if t > 0.0 && t.is_finite() => {}
                _ => return Err(Error::Config(format!("tolerance {name} must be positive, got {x}"))),
            }
        }
        Ok(())
    }
}

/// Suite-specific knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Random samples for the exact and quadrature suites.
    pub samples: usize,
    /// Highest total grade of the symbol pairs.
    pub max_grade: u32,
    /// Probe points per model for pointwise symbol checks.
    pub probes: usize,
    /// τ ladder for the truncated-expansion slope.
    pub slope_taus: Vec<u32>,
    /// Sign s of the closed-form commutator target s·2π sin 2πx sin 2πy.
    pub bracket_sign: f64,
    pub bump_radius: f64,
    /// Neighbourhood radius for the off-support kernel mass, in metric units.
    pub support_delta: f64,
    pub chi_orders: Vec<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            samples: 100,
            max_grade: 3,
            probes: 6,
            slope_taus: vec![16, 32, 64, 128, 256],
            bracket_sign: -1.0,
            bump_radius: 0.15,
            support_delta: 1.0,
            chi_orders: vec![1, 2, 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub suite: Suite,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub models: Vec<Model>,
    /// E realizations on the torus; the first is the reference.
    #[serde(default)]
    pub sections: Vec<Section>,
    #[serde(default)]
    pub ladder: LadderSpec,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: Params,
    /// Assertion groups to evaluate; empty means all.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_seed() -> u64 {
    20240611
}

fn default_workers() -> usize {
    1
}

impl RunConfig {
    pub fn new(suite: Suite) -> Self {
        RunConfig {
            suite,
            seed: default_seed(),
            models: Vec::new(),
            sections: Vec::new(),
            ladder: LadderSpec::default(),
            grid: Grid::default(),
            tolerances: Tolerances::default(),
            params: Params::default(),
            checks: Vec::new(),
            out: None,
            workers: default_workers(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.ladder.values()?;
        self.tolerances.validate()?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.grid.patch_radius <= self.grid.patch_inner || self.grid.patch_inner <= 0.0 {
            return Err(Error::Config("patch radii must satisfy 0 < inner < radius".into()));
        }
        if self.params.slope_taus.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("slope_taus must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Vec<u32> {
        let v = self.ladder.values().unwrap_or_default();
        if v.is_empty() {
            self.suite.default_ladder()
        } else {
            v
        }
    }

    pub fn models(&self) -> Vec<Model> {
        if self.models.is_empty() {
            self.suite.default_models()
        } else {
            self.models.clone()
        }
    }

    pub fn selected(&self, check: &str) -> bool {
        self.checks.is_empty() || self.checks.iter().any(|c| c == check)
    }
}
