use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use flycheck_core::oracle::{self, ExplicitDtmc};
use flycheck_core::pctl::parse_property_file;
use flycheck_core::prism::{build_semantics, elaborate, parse_model, Lit, PrismModel};
use flycheck_core::{parse_property, CheckConfig, ConvergenceScope, Engine, PropertyQuery, Verdict};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EngineKind {
    #[default]
    OnTheFly,
    Global,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PropertySource {
    File(PathBuf),
    Inline(String),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: PathBuf,
    pub properties: PropertySource,
    pub constants: BTreeMap<String, Lit>,
    pub epsilon: f64,
    pub engine: EngineKind,
    pub convergence: ConvergenceScope,
    pub state_cap: usize,
    pub bound_tolerance: f64,
    /// Exit with status 1 when some property is false.
    pub fail_on_false: bool,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>, properties: PropertySource) -> Self {
        let defaults = CheckConfig::default();
        RunConfig {
            model: model.into(),
            properties,
            constants: BTreeMap::new(),
            epsilon: defaults.epsilon,
            engine: EngineKind::OnTheFly,
            convergence: defaults.convergence,
            state_cap: defaults.state_cap,
            bound_tolerance: defaults.bound_tolerance,
            fail_on_false: true,
            jobs: 1,
        }
    }

    fn check_config(&self) -> CheckConfig {
        CheckConfig {
            epsilon: self.epsilon,
            state_cap: self.state_cap,
            convergence: self.convergence,
            bound_tolerance: self.bound_tolerance,
        }
    }
}

/// Errors that stop a run before any property is checked.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{message}")]
    Model { path: String, message: String },
    #[error("{path}:{message}")]
    Property { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Verdict(Verdict),
    Error(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property: String,
    pub outcome: Outcome,
    pub ms: f64,
    /// On the fly: records created. Global: reachable states.
    pub states: u64,
    /// On the fly: until iterations. Global: always 0.
    pub iterations: u64,
    /// Successor calls made by the on-the-fly engine.
    pub expanded: u64,
    pub deadlocks: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub properties: Vec<PropertyReport>,
}

impl RunReport {
    pub fn any_false(&self) -> bool {
        self.properties
            .iter()
            .any(|r| r.outcome == Outcome::Verdict(Verdict::Bool(false)))
    }

    pub fn any_error(&self) -> bool {
        self.properties.iter().any(|r| matches!(r.outcome, Outcome::Error(_)))
    }

    pub fn exit_code(&self, fail_on_false: bool) -> i32 {
        if self.any_error() {
            2
        } else if fail_on_false && self.any_false() {
            1
        } else {
            0
        }
    }
}

/// Parses `name=value,name=value`.
pub fn parse_constants(text: &str) -> Result<BTreeMap<String, Lit>, String> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got `{item}`"))?;
        let lit = Lit::parse(value).ok_or_else(|| format!("bad value for `{}`: `{value}`", name.trim()))?;
        if out.insert(name.trim().to_string(), lit).is_some() {
            return Err(format!("constant `{}` given twice", name.trim()));
        }
    }
    Ok(out)
}

/// Positioned messages (`line:col: ...`) attach directly to the path.
fn after_path(e: &dyn std::fmt::Display) -> String {
    let message = e.to_string();
    if message.starts_with(|c: char| c.is_ascii_digit()) {
        message
    } else {
        format!(" {message}")
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads, parses and elaborates a model file.
pub fn load_model(path: &Path, constants: &BTreeMap<String, Lit>) -> Result<PrismModel, RunError> {
    let text = read(path)?;
    let model_error = |e: &dyn std::fmt::Display| RunError::Model {
        path: path.display().to_string(),
        message: after_path(e),
    };
    let ast = parse_model(&text).map_err(|e| model_error(&e))?;
    let elaborated = elaborate(&ast, constants).map_err(|e| model_error(&e))?;
    Ok(build_semantics(elaborated))
}

fn load_properties(source: &PropertySource) -> Result<Vec<PropertyQuery>, RunError> {
    match source {
        PropertySource::Inline(text) => parse_property(text)
            .map(|q| vec![q])
            .map_err(|e| RunError::Property {
                path: "<inline>".into(),
                message: after_path(&e),
            }),
        PropertySource::File(path) => {
            parse_property_file(&read(path)?).map_err(|e| RunError::Property {
                path: path.display().to_string(),
                message: after_path(&e),
            })
        }
    }
}

/// Loads the model and properties, then checks every property with its
/// own engine. Reports come back in input order.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    if !(config.epsilon > 0.0 && config.epsilon.is_finite()) {
        return Err(RunError::Config(format!("epsilon must be positive, got {}", config.epsilon)));
    }
    if config.state_cap == 0 {
        return Err(RunError::Config("the state cap must be positive".into()));
    }
    let mut model = load_model(&config.model, &config.constants)?;
    let queries = load_properties(&config.properties)?;
    for q in &queries {
        model.register_atoms(&q.formula).map_err(|e| RunError::Property {
            path: q.source.clone(),
            message: after_path(&e),
        })?;
    }

    let explicit = match config.engine {
        EngineKind::OnTheFly => None,
        EngineKind::Global => {
            let start = Instant::now();
            let d = oracle::enumerate(&model, config.state_cap).and_then(|mut d| {
                for q in &queries {
                    d.add_atoms(&model, &q.formula.atoms())?;
                }
                Ok(d)
            });
            Some((d.map_err(|e| e.to_string()), start.elapsed().as_secs_f64() * 1e3))
        }
    };

    let check = |q: &PropertyQuery| match &explicit {
        None => check_on_the_fly(&model, q, config.check_config()),
        Some((d, build_ms)) => check_global(d, *build_ms, q),
    };

    let jobs = config.jobs.max(1).min(queries.len().max(1));
    let properties = if jobs == 1 {
        queries.iter().map(check).collect()
    } else {
        let slots: Vec<Mutex<Option<PropertyReport>>> = queries.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(q) = queries.get(i) else { break };
                    *slots[i].lock().unwrap() = Some(check(q));
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("every property is checked"))
            .collect()
    };
    Ok(RunReport { properties })
}

fn check_on_the_fly(model: &PrismModel, q: &PropertyQuery, config: CheckConfig) -> PropertyReport {
    let start = Instant::now();
    let mut engine = Engine::new(model, config);
    let outcome = match engine.evaluate(q) {
        Ok(v) => Outcome::Verdict(v),
        Err(e) => Outcome::Error(e.to_string()),
    };
    let stats = engine.stats();
    PropertyReport {
        property: q.source.clone(),
        outcome,
        ms: start.elapsed().as_secs_f64() * 1e3,
        states: stats.records_created,
        iterations: stats.iterations,
        expanded: stats.states_expanded,
        deadlocks: stats.deadlocks_patched,
    }
}

fn check_global(d: &Result<ExplicitDtmc, String>, build_ms: f64, q: &PropertyQuery) -> PropertyReport {
    let start = Instant::now();
    let (outcome, states) = match d {
        Ok(d) => (
            match oracle::oracle_evaluate(d, &q.formula) {
                Ok(v) => Outcome::Verdict(v),
                Err(e) => Outcome::Error(e.to_string()),
            },
            d.len() as u64,
        ),
        Err(e) => (Outcome::Error(e.clone()), 0),
    };
    PropertyReport {
        property: q.source.clone(),
        outcome,
        ms: build_ms + start.elapsed().as_secs_f64() * 1e3,
        states,
        iterations: 0,
        expanded: states,
        deadlocks: 0,
    }
}
