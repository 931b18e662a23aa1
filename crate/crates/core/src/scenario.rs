//! Scenario files: the problem data behind one CLI invocation.
//!
//! One `key = value` pair per line, `#` starts a comment. Matrices are
//! written row by row as nested brackets, vectors as flat brackets:
//!
//! ```text
//! A = [[1, 0.05], [0, 1]]
//! B = [[0], [0.05]]
//! N = 5
//! Q = [[1, 0], [0, 1]]
//! R = [[1]]
//! state_normals = [[1, 0], [-1, 0], [0, 1], [0, -1]]
//! state_offsets = [10, 10, 10, 10]
//! input_normals = [[1], [-1]]
//! input_offsets = [20, 20]
//! terminal_mode = riccati_set
//! x0 = [7.24, 10]
//! steps = 100
//! ```
//!
//! Optional keys: `Qf` (otherwise the DARE solution), `terminal_normals` and
//! `terminal_offsets` (required by `terminal_mode = explicit`),
//! `reference_states` with `reference_inputs` (one row per step) or
//! `reference_equilibrium`, `out_dir`, and `max_iter` for the stabilizing-set
//! iteration.

use std::fmt::Write as _;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use serde_json::Value;
use thiserror::Error;

use crate::format::fmt_exact;
use crate::invariant_sets::{
    max_stabilizing_set, InvariantSetError, StabilizingSetResult, DEFAULT_MAX_ITER,
};
use crate::mpc::{DiscreteLtiSystem, MpcConfig, MpcError, ReferenceSchedule};
use crate::polytope::{HPolyhedron, PolytopeError};
use crate::riccati::{solve_dare, CostWeights, RiccatiError, TerminalIngredients};

const KEYS: &[&str] = &[
    "A",
    "B",
    "N",
    "Q",
    "R",
    "Qf",
    "terminal_mode",
    "state_normals",
    "state_offsets",
    "input_normals",
    "input_offsets",
    "terminal_normals",
    "terminal_offsets",
    "x0",
    "steps",
    "reference_states",
    "reference_inputs",
    "reference_equilibrium",
    "out_dir",
    "max_iter",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, key `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("stabilizing-set iteration did not converge in {0} iterations")]
    NotConverged(usize),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
    #[error(transparent)]
    InvariantSet(#[from] InvariantSetError),
}

impl From<PolytopeError> for ScenarioError {
    fn from(e: PolytopeError) -> Self {
        ScenarioError::Mpc(MpcError::Polytope(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalMode {
    /// No terminal set; the last predicted state only has to satisfy the
    /// state constraints.
    None,
    /// `x_N = 0`.
    Origin,
    /// The maximal stabilizing set of the origin.
    RiccatiSet,
    /// The polytope given by `terminal_normals` / `terminal_offsets`.
    Explicit,
}

impl TerminalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalMode::None => "none",
            TerminalMode::Origin => "origin",
            TerminalMode::RiccatiSet => "riccati_set",
            TerminalMode::Explicit => "explicit",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => TerminalMode::None,
            "origin" => TerminalMode::Origin,
            "riccati_set" => TerminalMode::RiccatiSet,
            "explicit" => TerminalMode::Explicit,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceSpec {
    /// Row `k` of each table is the reference at step `k`.
    Table {
        states: Vec<DVector<f64>>,
        inputs: Vec<DVector<f64>>,
    },
    /// Constant reference at an equilibrium state.
    Equilibrium(DVector<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub horizon: usize,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub qf: Option<DMatrix<f64>>,
    pub terminal_mode: TerminalMode,
    pub state_set: HPolyhedron,
    pub input_set: HPolyhedron,
    pub terminal_set: Option<HPolyhedron>,
    pub x0: DVector<f64>,
    pub steps: usize,
    pub reference: Option<ReferenceSpec>,
    pub out_dir: Option<PathBuf>,
    pub max_iter: usize,
}

/// The terminal ingredients a scenario resolves to.
#[derive(Clone, Debug)]
pub struct ResolvedScenario {
    pub config: MpcConfig,
    /// Present when `Qf` was not given explicitly.
    pub riccati: Option<TerminalIngredients>,
    /// Present for `terminal_mode = riccati_set`.
    pub stabilizing_set: Option<StabilizingSetResult>,
}

struct Entry {
    line: usize,
    value: String,
}

fn value_error(line: usize, key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Value {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn json(entry: &Entry, key: &str) -> Result<Value, ScenarioError> {
    serde_json::from_str(&entry.value)
        .map_err(|e| value_error(entry.line, key, format!("malformed value: {e}")))
}

fn number(v: &Value, line: usize, key: &str) -> Result<f64, ScenarioError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| value_error(line, key, format!("expected a number, found `{v}`")))
}

fn vector(entry: &Entry, key: &str) -> Result<DVector<f64>, ScenarioError> {
    let v = json(entry, key)?;
    let items = v
        .as_array()
        .ok_or_else(|| value_error(entry.line, key, "expected a bracketed list of numbers"))?;
    let data = items
        .iter()
        .map(|x| number(x, entry.line, key))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DVector::from_vec(data))
}

fn rows(entry: &Entry, key: &str) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let v = json(entry, key)?;
    let outer = v
        .as_array()
        .ok_or_else(|| value_error(entry.line, key, "expected a list of rows"))?;
    outer
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| value_error(entry.line, key, "every row must be a bracketed list"))?
                .iter()
                .map(|x| number(x, entry.line, key))
                .collect()
        })
        .collect()
}

fn matrix(entry: &Entry, key: &str) -> Result<DMatrix<f64>, ScenarioError> {
    let data = rows(entry, key)?;
    let cols = data.first().map_or(0, Vec::len);
    if data.is_empty() || cols == 0 || data.iter().any(|r| r.len() != cols) {
        return Err(value_error(
            entry.line,
            key,
            "rows must be non-empty and of equal length",
        ));
    }
    Ok(DMatrix::from_fn(data.len(), cols, |i, j| data[i][j]))
}

fn count(entry: &Entry, key: &str) -> Result<usize, ScenarioError> {
    entry.value.parse::<usize>().map_err(|_| {
        value_error(
            entry.line,
            key,
            format!("expected a non-negative integer, found `{}`", entry.value),
        )
    })
}

struct Entries(Vec<(String, Entry)>);

impl Entries {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    fn require(&self, key: &'static str) -> Result<&Entry, ScenarioError> {
        self.get(key).ok_or(ScenarioError::Missing(key))
    }
}

fn polytope(
    entries: &Entries,
    normals_key: &'static str,
    offsets_key: &'static str,
) -> Result<HPolyhedron, ScenarioError> {
    let ne = entries.require(normals_key)?;
    let oe = entries.require(offsets_key)?;
    let normals = matrix(ne, normals_key)?;
    let offsets = vector(oe, offsets_key)?;
    if offsets.len() != normals.nrows() {
        return Err(value_error(
            oe.line,
            offsets_key,
            format!(
                "expected {} offsets, found {}",
                normals.nrows(),
                offsets.len()
            ),
        ));
    }
    HPolyhedron::new(normals, offsets).map_err(|e| value_error(ne.line, normals_key, e.to_string()))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut entries: Vec<(String, Entry)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ScenarioError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(value_error(line, key, "unknown key"));
            }
            if entries.iter().any(|(k, _)| k == key) {
                return Err(value_error(line, key, "duplicate key"));
            }
            entries.push((
                key.to_string(),
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            ));
        }
        let entries = Entries(entries);

        let a = matrix(entries.require("A")?, "A")?;
        let b = matrix(entries.require("B")?, "B")?;
        let n_entry = entries.require("N")?;
        let horizon = count(n_entry, "N")?;
        if horizon == 0 {
            return Err(value_error(n_entry.line, "N", "horizon must be ≥ 1"));
        }
        let q = matrix(entries.require("Q")?, "Q")?;
        let r = matrix(entries.require("R")?, "R")?;
        let qf = entries.get("Qf").map(|e| matrix(e, "Qf")).transpose()?;
        let terminal_mode = match entries.get("terminal_mode") {
            None => TerminalMode::None,
            Some(e) => TerminalMode::parse(&e.value).ok_or_else(|| {
                value_error(
                    e.line,
                    "terminal_mode",
                    format!(
                        "expected none, origin, riccati_set or explicit, found `{}`",
                        e.value
                    ),
                )
            })?,
        };
        let state_set = polytope(&entries, "state_normals", "state_offsets")?;
        let input_set = polytope(&entries, "input_normals", "input_offsets")?;
        let has_terminal =
            entries.get("terminal_normals").is_some() || entries.get("terminal_offsets").is_some();
        let terminal_set = match (terminal_mode, has_terminal) {
            (TerminalMode::Explicit, _) => {
                Some(polytope(&entries, "terminal_normals", "terminal_offsets")?)
            }
            (_, true) => {
                let e = entries
                    .get("terminal_normals")
                    .or(entries.get("terminal_offsets"))
                    .unwrap();
                return Err(value_error(
                    e.line,
                    "terminal_normals",
                    "only allowed with terminal_mode = explicit",
                ));
            }
            _ => None,
        };
        let x0 = vector(entries.require("x0")?, "x0")?;
        let steps_entry = entries.require("steps")?;
        let steps = count(steps_entry, "steps")?;
        if steps == 0 {
            return Err(value_error(steps_entry.line, "steps", "must be ≥ 1"));
        }

        let reference = match (
            entries.get("reference_states"),
            entries.get("reference_inputs"),
            entries.get("reference_equilibrium"),
        ) {
            (None, None, None) => None,
            (None, None, Some(e)) => Some(ReferenceSpec::Equilibrium(vector(
                e,
                "reference_equilibrium",
            )?)),
            (Some(s), Some(u), None) => {
                let to_vecs = |rows: Vec<Vec<f64>>| {
                    rows.into_iter().map(DVector::from_vec).collect::<Vec<_>>()
                };
                Some(ReferenceSpec::Table {
                    states: to_vecs(self::rows(s, "reference_states")?),
                    inputs: to_vecs(self::rows(u, "reference_inputs")?),
                })
            }
            (s, u, eq) => {
                let line = s.or(u).or(eq).map_or(0, |e| e.line);
                return Err(ScenarioError::Syntax {
                    line,
                    message: "give either reference_states with reference_inputs, or reference_equilibrium".into(),
                });
            }
        };
        let out_dir = entries.get("out_dir").map(|e| PathBuf::from(&e.value));
        let max_iter = entries
            .get("max_iter")
            .map(|e| count(e, "max_iter"))
            .transpose()?
            .unwrap_or(DEFAULT_MAX_ITER);

        let scenario = Scenario {
            a,
            b,
            horizon,
            q,
            r,
            qf,
            terminal_mode,
            state_set,
            input_set,
            terminal_set,
            x0,
            steps,
            reference,
            out_dir,
            max_iter,
        };
        scenario.check_dimensions()?;
        Ok(scenario)
    }

    fn check_dimensions(&self) -> Result<(), ScenarioError> {
        let sys = self.system()?;
        if self.x0.len() != sys.n() {
            return Err(ScenarioError::Invalid(format!(
                "x0 has {} entries, the system has {} states",
                self.x0.len(),
                sys.n()
            )));
        }
        match &self.reference {
            Some(ReferenceSpec::Table { states, inputs }) => {
                if states.is_empty() || inputs.is_empty() {
                    return Err(ScenarioError::Invalid(
                        "reference tables must not be empty".into(),
                    ));
                }
                if states.iter().any(|s| s.len() != sys.n())
                    || inputs.iter().any(|u| u.len() != sys.m())
                {
                    return Err(ScenarioError::Invalid(
                        "reference rows do not match the system dimensions".into(),
                    ));
                }
            }
            Some(ReferenceSpec::Equilibrium(x)) if x.len() != sys.n() => {
                return Err(ScenarioError::Invalid(
                    "reference_equilibrium does not match the state dimension".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn system(&self) -> Result<DiscreteLtiSystem, ScenarioError> {
        Ok(DiscreteLtiSystem::new(self.a.clone(), self.b.clone())?)
    }

    pub fn weights(&self) -> Result<CostWeights, ScenarioError> {
        Ok(CostWeights::new(self.q.clone(), self.r.clone())?)
    }

    pub fn reference_schedule(&self) -> Result<Option<ReferenceSchedule>, ScenarioError> {
        let sys = self.system()?;
        Ok(match &self.reference {
            None => None,
            Some(ReferenceSpec::Table { states, inputs }) => {
                Some(ReferenceSchedule::new(states.clone(), inputs.clone())?)
            }
            Some(ReferenceSpec::Equilibrium(x)) => Some(ReferenceSchedule::equilibrium(&sys, x)?),
        })
    }

    /// Solves the DARE when needed, computes the terminal set the mode asks
    /// for and assembles the controller configuration.
    pub fn resolve(&self) -> Result<ResolvedScenario, ScenarioError> {
        let sys = self.system()?;
        let weights = self.weights()?;
        let (qf, riccati) = match &self.qf {
            Some(qf) => (qf.clone(), None),
            None => {
                let t = solve_dare(&sys, &weights)?;
                (t.qf.clone(), Some(t))
            }
        };
        let mut stabilizing_set = None;
        let terminal_set = match self.terminal_mode {
            TerminalMode::None => None,
            TerminalMode::Origin => Some(HPolyhedron::origin(sys.n())),
            TerminalMode::Explicit => self.terminal_set.clone(),
            TerminalMode::RiccatiSet => {
                let res =
                    max_stabilizing_set(&sys, &self.state_set, &self.input_set, self.max_iter)?;
                if !res.converged {
                    return Err(ScenarioError::NotConverged(res.iterations));
                }
                let set = res.set.clone();
                stabilizing_set = Some(res);
                Some(set)
            }
        };
        let config = MpcConfig::new(
            sys,
            self.horizon,
            weights,
            qf,
            self.state_set.clone(),
            self.input_set.clone(),
            terminal_set,
        )?;
        Ok(ResolvedScenario {
            config,
            riccati,
            stabilizing_set,
        })
    }

    /// Writes the scenario back in the file format, with exact floats.
    pub fn to_text(&self) -> String {
        fn vec_text(v: &[f64]) -> String {
            let items: Vec<String> = v.iter().map(|x| fmt_exact(*x)).collect();
            format!("[{}]", items.join(", "))
        }
        fn mat_text(m: &DMatrix<f64>) -> String {
            let rows: Vec<String> = (0..m.nrows())
                .map(|i| vec_text(&m.row(i).iter().copied().collect::<Vec<_>>()))
                .collect();
            format!("[{}]", rows.join(", "))
        }
        fn rows_text(rows: &[DVector<f64>]) -> String {
            let rows: Vec<String> = rows.iter().map(|r| vec_text(r.as_slice())).collect();
            format!("[{}]", rows.join(", "))
        }
        let mut out = String::new();
        let _ = writeln!(out, "A = {}", mat_text(&self.a));
        let _ = writeln!(out, "B = {}", mat_text(&self.b));
        let _ = writeln!(out, "N = {}", self.horizon);
        let _ = writeln!(out, "Q = {}", mat_text(&self.q));
        let _ = writeln!(out, "R = {}", mat_text(&self.r));
        if let Some(qf) = &self.qf {
            let _ = writeln!(out, "Qf = {}", mat_text(qf));
        }
        let _ = writeln!(out, "terminal_mode = {}", self.terminal_mode.as_str());
        let sets = [
            ("state", Some(&self.state_set)),
            ("input", Some(&self.input_set)),
            ("terminal", self.terminal_set.as_ref()),
        ];
        for (name, set) in sets {
            if let Some(p) = set {
                let _ = writeln!(out, "{name}_normals = {}", mat_text(p.normals()));
                let _ = writeln!(out, "{name}_offsets = {}", vec_text(p.offsets().as_slice()));
            }
        }
        let _ = writeln!(out, "x0 = {}", vec_text(self.x0.as_slice()));
        let _ = writeln!(out, "steps = {}", self.steps);
        match &self.reference {
            Some(ReferenceSpec::Table { states, inputs }) => {
                let _ = writeln!(out, "reference_states = {}", rows_text(states));
                let _ = writeln!(out, "reference_inputs = {}", rows_text(inputs));
            }
            Some(ReferenceSpec::Equilibrium(x)) => {
                let _ = writeln!(out, "reference_equilibrium = {}", vec_text(x.as_slice()));
            }
            None => {}
        }
        if let Some(dir) = &self.out_dir {
            let _ = writeln!(out, "out_dir = {}", dir.display());
        }
        if self.max_iter != DEFAULT_MAX_ITER {
            let _ = writeln!(out, "max_iter = {}", self.max_iter);
        }
        out
    }
}
