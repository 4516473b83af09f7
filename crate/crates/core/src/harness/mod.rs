//! Configuration-driven batch runner for the verification suites.

pub mod config;
pub mod report;
pub mod suites;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    build_sphere, build_torus, patch_for, sphere_for, torus_for, ModelManifold, Section, DEFAULT_CUBIC,
};
use crate::projector::{projector_on, Projector, SpectralData};

pub use config::{LadderSpec, Model, RunConfig, Suite};
pub use report::{Assertion, ReportTable, SuiteReport, Summary};

/// Exit status of a run.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::GridGuard(_) => EXIT_RESOURCE,
        _ => EXIT_FAIL,
    }
}

/// The spectral data and projector of one (model, E, k).
pub struct Level {
    pub spectral: SpectralData,
    pub projector: Arc<Projector>,
}

/// Runs suites and memoizes projectors across them.
#[derive(Default)]
pub struct Harness {
    cache: Mutex<HashMap<String, Arc<Level>>>,
}

impl Harness {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn manifold(&self, cfg: &RunConfig, model: Model, k: u32) -> Result<Arc<ModelManifold>> {
        let g = &cfg.grid;
        let m = match model {
            Model::Torus => g.torus_n.map_or_else(|| torus_for(k), build_torus)?,
            Model::Sphere => g.sphere_n.map_or_else(|| sphere_for(k), |n| build_sphere(n, n))?,
            Model::Patch => patch_for(k, g.patch_radius)?,
        };
        if m.len() > g.max_nodes {
            return Err(Error::GridGuard(format!(
                "{} needs {} nodes at k = {k}, above the limit {}",
                m.name(),
                m.len(),
                g.max_nodes
            )));
        }
        m.grid_guard(k)?;
        Ok(Arc::new(m))
    }

    pub fn sections(&self, cfg: &RunConfig, model: Model) -> Vec<Section> {
        match model {
            Model::Torus => {
                let s: Vec<Section> = cfg
                    .sections
                    .iter()
                    .filter(|s| matches!(s, Section::TorusFlat | Section::TorusCubic { .. }))
                    .cloned()
                    .collect();
                if s.is_empty() {
                    vec![Section::TorusCubic { c: DEFAULT_CUBIC }]
                } else {
                    s
                }
            }
            Model::Sphere => vec![Section::Sphere],
            Model::Patch => vec![Section::Patch],
        }
    }

    pub fn level(&self, cfg: &RunConfig, model: Model, section: &Section, k: u32) -> Result<Arc<Level>> {
        let m = self.manifold(cfg, model, k)?;
        let key = format!("{}|{}|{k}", serde_json::to_string(&m.kind).unwrap_or_default(), section.name());
        if let Some(l) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(l.clone());
        }
        let (spectral, projector) = projector_on(m, section, k)?;
        let level = Arc::new(Level { spectral, projector: Arc::new(projector) });
        self.cache.lock().expect("cache lock").insert(key, level.clone());
        Ok(level)
    }

    pub fn levels(&self, cfg: &RunConfig, model: Model, section: &Section, ks: &[u32]) -> Result<Vec<Arc<Level>>> {
        self.par_map(cfg, ks, |&k| self.level(cfg, model, section, k))
    }

    /// Maps over `items` on a pool of `cfg.workers` threads, keeping the input order.
    pub fn par_map<T: Sync, R: Send>(
        &self,
        cfg: &RunConfig,
        items: &[T],
        f: impl Fn(&T) -> Result<R> + Sync + Send,
    ) -> Result<Vec<R>> {
        if cfg.workers <= 1 {
            return items.iter().map(f).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| items.par_iter().map(f).collect())
    }

    pub fn run_suite(&self, cfg: &RunConfig) -> Result<SuiteReport> {
        use suites::{algebra, models, operators, symbols};
        match cfg.suite {
            Suite::Star => algebra::star_suite(cfg),
            Suite::Laplace => algebra::laplace_suite(cfg),
            Suite::GeometryCheck => models::geometry_suite(self, cfg),
            Suite::Projector => models::projector_suite(self, cfg),
            Suite::Toeplitz => operators::toeplitz_suite(self, cfg),
            Suite::Commutator => operators::commutator_suite(self, cfg),
            Suite::NormLaw => operators::norm_law_suite(self, cfg),
            Suite::Support => operators::support_suite(self, cfg),
            Suite::VerifySymbolProduct => symbols::symbol_product_suite(self, cfg),
            Suite::All => Err(Error::Config("'all' expands to the individual suites".into())),
        }
    }

    /// Runs the configured suites and writes the reports when `out` is set.
    pub fn run(&self, cfg: &RunConfig) -> Result<Summary> {
        cfg.validate()?;
        let plan: Vec<RunConfig> = if cfg.suite == Suite::All {
            Suite::EACH
                .iter()
                .map(|&s| RunConfig { suite: s, ladder: LadderSpec::default(), models: Vec::new(), ..cfg.clone() })
                .collect()
        } else {
            vec![cfg.clone()]
        };
        let mut reports = Vec::with_capacity(plan.len());
        for c in &plan {
            reports.push(self.run_suite(c)?);
        }
        let summary = Summary {
            passed: reports.iter().all(|r| r.passed),
            config: serde_json::to_value(RunConfig { out: None, ..cfg.clone() }).unwrap_or_default(),
            suites: reports,
        };
        if let Some(dir) = &cfg.out {
            report::render(&summary, dir)?;
        }
        Ok(summary)
    }
}

/// One line per assertion.
pub fn format_summary(summary: &Summary) -> String {
    let mut out = String::new();
    for s in &summary.suites {
        for a in &s.assertions {
            let value = a.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{} {:<44} value={value} ({})\n",
                if a.passed { "PASS" } else { "FAIL" },
                a.id,
                a.requirement
            ));
        }
    }
    out.push_str(if summary.passed { "verdict: pass\n" } else { "verdict: fail\n" });
    out
}
