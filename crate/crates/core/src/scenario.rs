//! Scenario files, analysis runs and report output.
//!
//! A scenario is a TOML document (schema version 1):
//!
//! ```toml
//! schema_version = 1
//! name = "hardy-symmetric"
//! order = "both"                      # "l-first" | "r-first" | "both"
//! analyses = ["counterfactual", "gap"]
//!
//! [state]                             # one of the forms below
//! preset = "hardy"                    # alpha, beta in (0, pi/2)
//! alpha = 0.7853981633974483
//! beta = 0.7853981633974483
//! # preset = "singlet"
//! # preset = "product"; l_angle = 0.3; r_angle = 1.2
//! # d_l = 2; d_r = 2; amplitudes = [[re, im], ...]
//!
//! [bases]                             # required unless preset = "hardy"
//! l = { angle = 0.0, labels = ["L+", "L-"] }
//! r = { vectors = [[[1, 0], [0, 0]], [[0, 0], [1, 0]]], labels = ["R+", "R-"] }
//! r_prime = { angle = 0.5, labels = ["Q+", "Q-"] }
//!
//! [outcomes]                          # defaults: first label of each basis
//! l = "L+"
//! r = "R+"
//! r_prime = "Q+"
//!
//! [montecarlo]
//! n_runs = 100000
//! seed = 7
//!
//! [spacetime]
//! event_l = [0.5, 0.0, 0.0, 0.0]
//! event_r = [0.0, 1.0, 0.0, 0.0]
//! ```
//!
//! Analyses: `joint`, `conditional`, `counterfactual`, `gap`, `reciprocity`,
//! `montecarlo`. Every reported number becomes a CSV row
//! `scenario,order,quantity,label,value,path`, where `path` says how the
//! number was obtained: `analytic`, `closed-form` or `empirical`.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::{self, Write as _};
use std::ops::Range;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Deserialize;
use toml::Spanned;

use crate::counterfactual::{conditional_prob, counterfactual_prob, joint_prob, pure_l_first, pure_r_first, Scenario};
use crate::error::Error;
use crate::hardy::{self, build_hardy, closed_form_l_r, closed_form_r_l, HardyParams};
use crate::hilbert::{tensor, BipartiteSpace, DensityOperator, Factor, Ket, C64};
use crate::measurement::{check_reciprocity, symmetric_case, MeasurementBasis, ReciprocityStatus};
use crate::montecarlo::{binomial_sigma, empirical_conditional, simulate, RunConfig};
use crate::spacetime::{causally_separated, find_order_reversing_boost, interval, Event, OrderTag};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "scenario,order,quantity,label,value,path";

/// Tolerance on the norm of explicit amplitudes before renormalization.
const AMPLITUDE_NORM_TOL: f64 = 1e-6;

/// A validation failure anchored to a position in the scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ScenarioError {}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Bad input: scenario file or command-line option.
    Invalid(String),
    /// A conditioning outcome has zero probability (or never occurred).
    Impossible(String),
    /// Any other library failure.
    Failed(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) => 2,
            RunError::Impossible(_) => 3,
            RunError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid(m) => write!(f, "{m}"),
            RunError::Impossible(m) => write!(f, "{m}"),
            RunError::Failed(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::ImpossibleCondition { ref label, probability } => RunError::Impossible(format!(
                "conditioning outcome {label:?} is impossible (probability {probability:e})"
            )),
            Error::ImpossibleOutcome { ref label, probability } => {
                RunError::Impossible(format!("outcome {label:?} is impossible (probability {probability:e})"))
            }
            Error::NoConditionEvents(ref label) => {
                RunError::Impossible(format!("no Monte Carlo run produced conditioning outcome {label:?}"))
            }
            Error::DegenerateParams { .. } => RunError::Invalid(e.to_string()),
            other => RunError::Failed(other),
        }
    }
}

// ---- raw file layout ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: Spanned<u32>,
    name: Option<String>,
    order: Option<Spanned<String>>,
    analyses: Spanned<Vec<Spanned<String>>>,
    state: Spanned<RawState>,
    bases: Option<RawBases>,
    outcomes: Option<RawOutcomes>,
    montecarlo: Option<Spanned<RawMonteCarlo>>,
    spacetime: Option<Spanned<RawSpacetime>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    preset: Option<Spanned<String>>,
    alpha: Option<f64>,
    beta: Option<f64>,
    l_angle: Option<f64>,
    r_angle: Option<f64>,
    d_l: Option<usize>,
    d_r: Option<usize>,
    amplitudes: Option<Spanned<Vec<[f64; 2]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBases {
    l: Option<Spanned<RawBasis>>,
    r: Option<Spanned<RawBasis>>,
    r_prime: Option<Spanned<RawBasis>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    angle: Option<f64>,
    vectors: Option<Vec<Vec<[f64; 2]>>>,
    labels: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcomes {
    l: Option<Spanned<String>>,
    r: Option<Spanned<String>>,
    r_prime: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    n_runs: u64,
    seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpacetime {
    event_l: [f64; 4],
    event_r: [f64; 4],
}

// ---- validated scenario ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Analysis {
    Joint,
    Conditional,
    Counterfactual,
    Gap,
    Reciprocity,
    MonteCarlo,
}

impl Analysis {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "joint" => Analysis::Joint,
            "conditional" => Analysis::Conditional,
            "counterfactual" => Analysis::Counterfactual,
            "gap" => Analysis::Gap,
            "reciprocity" => Analysis::Reciprocity,
            "montecarlo" => Analysis::MonteCarlo,
            _ => return None,
        })
    }
}

/// Which orders to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    One(OrderTag),
    Both,
}

impl OrderChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "l-first" => Some(OrderChoice::One(OrderTag::LFirst)),
            "r-first" => Some(OrderChoice::One(OrderTag::RFirst)),
            "both" => Some(OrderChoice::Both),
            _ => None,
        }
    }

    pub fn tags(self) -> Vec<OrderTag> {
        match self {
            OrderChoice::One(t) => vec![t],
            OrderChoice::Both => vec![OrderTag::RFirst, OrderTag::LFirst],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Hardy(HardyParams),
    Singlet,
    Product { l_angle: f64, r_angle: f64 },
    Explicit { space: BipartiteSpace, ket: Ket },
}

#[derive(Debug, Clone)]
struct Anchored<T> {
    value: T,
    span: Range<usize>,
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub name: String,
    pub state: StateSpec,
    pub order: OrderChoice,
    pub analyses: BTreeSet<Analysis>,
    pub montecarlo: Option<(u64, u64)>,
    pub spacetime: Option<(Event, Event)>,
    bases: [Option<Anchored<RawBasis>>; 3],
    outcomes: [Option<Anchored<String>>; 3],
}

/// Concrete state, bases and outcome labels for one parameter point.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: BipartiteSpace,
    pub ket: Ket,
    pub rho0: DensityOperator,
    pub l_basis: MeasurementBasis,
    pub r_basis: MeasurementBasis,
    pub r_prime_basis: Option<MeasurementBasis>,
    pub l: String,
    pub r: String,
    pub r_prime: Option<String>,
    pub hardy: Option<HardyParams>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, col)
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn err(&self, span: &Range<usize>, message: impl Into<String>) -> ScenarioError {
        let (line, column) = line_col(self.text, span.start);
        ScenarioError {
            line,
            column,
            message: message.into(),
        }
    }
}

fn parse_state(src: &Source, raw: &Spanned<RawState>) -> Result<StateSpec, ScenarioError> {
    let span = raw.span();
    let st = raw.get_ref();
    if let Some(amps) = &st.amplitudes {
        if st.preset.is_some() {
            return Err(src.err(&span, "state takes either a preset or explicit amplitudes, not both"));
        }
        let (d_l, d_r) = match (st.d_l, st.d_r) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(src.err(&span, "explicit amplitudes need d_l and d_r")),
        };
        let space = BipartiteSpace::new(d_l, d_r).map_err(|e| src.err(&span, e.to_string()))?;
        let list = amps.get_ref();
        if list.len() != space.dim() {
            return Err(src.err(
                &amps.span(),
                format!(
                    "expected {} amplitudes for d_l={d_l}, d_r={d_r}, found {}",
                    space.dim(),
                    list.len()
                ),
            ));
        }
        let v = DVector::from_iterator(list.len(), list.iter().map(|[re, im]| C64::new(*re, *im)));
        let n2 = v.norm_squared();
        if !n2.is_finite() || (n2 - 1.0).abs() > AMPLITUDE_NORM_TOL {
            return Err(src.err(
                &amps.span(),
                format!("amplitudes have squared norm {n2}, expected 1 within {AMPLITUDE_NORM_TOL:e}"),
            ));
        }
        let ket = Ket::normalized(v).map_err(|e| src.err(&amps.span(), e.to_string()))?;
        return Ok(StateSpec::Explicit { space, ket });
    }
    let Some(preset) = &st.preset else {
        return Err(src.err(&span, "state needs a preset or explicit amplitudes"));
    };
    match preset.get_ref().as_str() {
        "hardy" => {
            let (Some(alpha), Some(beta)) = (st.alpha, st.beta) else {
                return Err(src.err(&span, "hardy preset needs alpha and beta"));
            };
            HardyParams::new(alpha, beta)
                .map(StateSpec::Hardy)
                .map_err(|e| src.err(&span, e.to_string()))
        }
        "singlet" => Ok(StateSpec::Singlet),
        "product" => Ok(StateSpec::Product {
            l_angle: st.l_angle.unwrap_or(0.0),
            r_angle: st.r_angle.unwrap_or(0.0),
        }),
        other => Err(src.err(
            &preset.span(),
            format!("unknown preset {other:?} (expected hardy, singlet or product)"),
        )),
    }
}

pub fn parse_scenario(text: &str, default_name: &str) -> Result<ScenarioFile, ScenarioError> {
    let src = Source { text };
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        src.err(&span, e.message().trim().to_string())
    })?;

    if *raw.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(src.err(
            &raw.schema_version.span(),
            format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                raw.schema_version.get_ref()
            ),
        ));
    }

    let order = match &raw.order {
        None => OrderChoice::Both,
        Some(o) => OrderChoice::parse(o.get_ref()).ok_or_else(|| {
            src.err(
                &o.span(),
                format!("unknown order {:?} (expected l-first, r-first or both)", o.get_ref()),
            )
        })?,
    };

    let mut analyses = BTreeSet::new();
    for a in raw.analyses.get_ref() {
        let parsed = Analysis::parse(a.get_ref())
            .ok_or_else(|| src.err(&a.span(), format!("unknown analysis {:?}", a.get_ref())))?;
        analyses.insert(parsed);
    }
    if analyses.is_empty() && raw.spacetime.is_none() {
        return Err(src.err(&raw.analyses.span(), "no analyses requested"));
    }

    let state = parse_state(&src, &raw.state)?;

    let anchor_basis = |b: &Option<Spanned<RawBasis>>| {
        b.as_ref().map(|s| Anchored {
            value: s.get_ref().clone(),
            span: s.span(),
        })
    };
    let bases = match &raw.bases {
        Some(b) => [anchor_basis(&b.l), anchor_basis(&b.r), anchor_basis(&b.r_prime)],
        None => [None, None, None],
    };
    let anchor_label = |o: &Option<Spanned<String>>| {
        o.as_ref().map(|s| Anchored {
            value: s.get_ref().clone(),
            span: s.span(),
        })
    };
    let outcomes = match &raw.outcomes {
        Some(o) => [anchor_label(&o.l), anchor_label(&o.r), anchor_label(&o.r_prime)],
        None => [None, None, None],
    };

    let montecarlo = match &raw.montecarlo {
        Some(mc) => {
            let m = mc.get_ref();
            if m.n_runs == 0 {
                return Err(src.err(&mc.span(), "montecarlo.n_runs must be at least 1"));
            }
            Some((m.n_runs, m.seed))
        }
        None => None,
    };
    if analyses.contains(&Analysis::MonteCarlo) && montecarlo.is_none() {
        return Err(src.err(&raw.analyses.span(), "montecarlo analysis needs a [montecarlo] table"));
    }

    let spacetime = match &raw.spacetime {
        Some(st) => {
            let s = st.get_ref();
            let p = Event::from_array(s.event_l).map_err(|e| src.err(&st.span(), e.to_string()))?;
            let q = Event::from_array(s.event_r).map_err(|e| src.err(&st.span(), e.to_string()))?;
            Some((p, q))
        }
        None => None,
    };

    let name = raw.name.clone().unwrap_or_else(|| default_name.to_string());
    if !csv_safe(&name) {
        return Err(src.err(
            &(0..0),
            format!("name {name:?} must be non-empty and free of commas, quotes and line breaks"),
        ));
    }
    let file = ScenarioFile {
        name,
        state,
        order,
        analyses,
        montecarlo,
        spacetime,
        bases,
        outcomes,
    };
    // Resolve once so that bad bases or labels are reported against the file.
    file.instance_checked(&src, None)?;
    Ok(file)
}

fn csv_safe(s: &str) -> bool {
    !s.is_empty() && !s.contains([',', '"', '\n', '\r'])
}

fn build_basis(factor: Factor, dim: usize, raw: &RawBasis) -> Result<MeasurementBasis, String> {
    if raw.labels.len() != dim {
        return Err(format!("expected {dim} labels, found {}", raw.labels.len()));
    }
    if let Some(bad) = raw.labels.iter().find(|l| !csv_safe(l)) {
        return Err(format!(
            "label {bad:?} must be non-empty and free of commas, quotes and line breaks"
        ));
    }
    match (&raw.angle, &raw.vectors) {
        (Some(theta), None) => {
            if dim != 2 {
                return Err(format!(
                    "an angle defines a qubit basis, but the factor has dimension {dim}"
                ));
            }
            MeasurementBasis::rotated(factor, *theta, [&raw.labels[0], &raw.labels[1]]).map_err(|e| e.to_string())
        }
        (None, Some(vectors)) => {
            if vectors.len() != dim {
                return Err(format!("expected {dim} vectors, found {}", vectors.len()));
            }
            let mut kets = Vec::with_capacity(dim);
            for v in vectors {
                if v.len() != dim {
                    return Err(format!("expected vectors of length {dim}, found {}", v.len()));
                }
                let amps = DVector::from_iterator(dim, v.iter().map(|[re, im]| C64::new(*re, *im)));
                kets.push(Ket::normalized(amps).map_err(|e| e.to_string())?);
            }
            MeasurementBasis::new(factor, kets, raw.labels.clone()).map_err(|e| e.to_string())
        }
        _ => Err("a basis needs exactly one of `angle` or `vectors`".into()),
    }
}

impl ScenarioFile {
    pub fn is_hardy(&self) -> bool {
        matches!(self.state, StateSpec::Hardy(_))
    }

    /// Resolves the scenario, optionally with replacement Hardy parameters.
    pub fn instance(&self, hardy_params: Option<HardyParams>) -> Result<Instance, RunError> {
        self.instance_checked(&Source { text: "" }, hardy_params)
            .map_err(|e| RunError::Invalid(e.message))
    }

    fn instance_checked(&self, src: &Source, hardy_params: Option<HardyParams>) -> Result<Instance, ScenarioError> {
        let whole = 0..0;
        let internal = |e: Error| src.err(&whole, e.to_string());
        let (space, ket, defaults, params) = match &self.state {
            StateSpec::Hardy(p) => {
                let p = hardy_params.unwrap_or(*p);
                let h = build_hardy(p).map_err(internal)?;
                let defaults = Some((h.l2.clone(), h.r2.clone(), h.r1.clone()));
                (h.space, h.ket0.clone(), defaults, Some(p))
            }
            StateSpec::Singlet => {
                let s = BipartiteSpace::qubits();
                let h = FRAC_1_SQRT_2;
                let ket = Ket::from_real(&[0.0, h, -h, 0.0]).map_err(internal)?;
                (s, ket, None, None)
            }
            StateSpec::Product { l_angle, r_angle } => {
                let s = BipartiteSpace::qubits();
                let a = Ket::from_real(&[l_angle.cos(), l_angle.sin()]).map_err(internal)?;
                let b = Ket::from_real(&[r_angle.cos(), r_angle.sin()]).map_err(internal)?;
                (s, tensor(s, &a, &b).map_err(internal)?, None, None)
            }
            StateSpec::Explicit { space, ket } => (*space, ket.clone(), None, None),
        };

        let factors = [Factor::L, Factor::R, Factor::R];
        let names = ["l", "r", "r_prime"];
        let mut resolved: [Option<MeasurementBasis>; 3] = [None, None, None];
        for k in 0..3 {
            resolved[k] = match (&self.bases[k], &defaults) {
                (Some(raw), _) => Some(
                    build_basis(factors[k], space.factor_dim(factors[k]), &raw.value)
                        .map_err(|m| src.err(&raw.span, format!("bases.{}: {m}", names[k])))?,
                ),
                (None, Some((l, r, rp))) => Some([l, r, rp][k].clone()),
                (None, None) => None,
            };
        }
        let [l_basis, r_basis, r_prime_basis] = resolved;
        let (Some(l_basis), Some(r_basis)) = (l_basis, r_basis) else {
            return Err(src.err(&whole, "bases.l and bases.r are required for this state"));
        };
        let needs_prime = self.analyses.contains(&Analysis::Counterfactual) || self.analyses.contains(&Analysis::Gap);
        if needs_prime && r_prime_basis.is_none() {
            return Err(src.err(&whole, "counterfactual analyses need bases.r_prime"));
        }

        let pick = |k: usize, basis: &MeasurementBasis, fallback: Option<&str>| -> Result<String, ScenarioError> {
            match &self.outcomes[k] {
                Some(a) => {
                    basis
                        .index_of(&a.value)
                        .map_err(|_| src.err(&a.span, format!("outcomes.{}: unknown label {:?}", names[k], a.value)))?;
                    Ok(a.value.clone())
                }
                None => Ok(fallback.unwrap_or(&basis.labels()[0]).to_string()),
            }
        };
        let hardy_default = |s: &'static str| params.map(|_| s);
        let l = pick(0, &l_basis, hardy_default(hardy::L).filter(|_| self.bases[0].is_none()))?;
        let r = pick(1, &r_basis, hardy_default(hardy::R).filter(|_| self.bases[1].is_none()))?;
        let r_prime = match &r_prime_basis {
            Some(b) => Some(pick(
                2,
                b,
                hardy_default(hardy::R_PRIME).filter(|_| self.bases[2].is_none()),
            )?),
            None => None,
        };
        if let Some(rp) = &r_prime_basis {
            if r_basis.commutator_norm(rp) <= crate::EPS_NUM {
                let span = self.bases[2].as_ref().map_or(0..0, |a| a.span.clone());
                return Err(src.err(
                    &span,
                    "bases.r_prime commutes with bases.r; a counterfactual needs incompatible observables",
                ));
            }
        }
        let rho0 = DensityOperator::pure(space, &ket).map_err(internal)?;
        Ok(Instance {
            space,
            ket,
            rho0,
            l_basis,
            r_basis,
            r_prime_basis,
            l,
            r,
            r_prime,
            hardy: params,
        })
    }
}

// ---- runs and reports ----

/// Inclusive linear grid over one Hardy angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Beta,
}

impl Sweep {
    /// Parses `alpha=a:b:n` or `beta=a:b:n`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep {s:?}: expected NAME=a:b:n"))?;
        let param = match name.trim() {
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            other => {
                return Err(format!(
                    "sweep {s:?}: unknown parameter {other:?} (expected alpha or beta)"
                ))
            }
        };
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("sweep {s:?}: expected a:b:n"));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("sweep {s:?}: bad number {t:?}"))
        };
        let start = num(parts[0])?;
        let end = num(parts[1])?;
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| format!("sweep {s:?}: point count must be a positive integer"))?;
        Ok(Self {
            param,
            start,
            end,
            points,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub order: Option<OrderChoice>,
    pub sweeps: Vec<Sweep>,
    pub seed: Option<u64>,
    pub runs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub order: String,
    pub quantity: String,
    pub label: String,
    pub value: f64,
    pub path: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

/// `%.12g`: twelve significant digits, trailing zeros dropped.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.scenario,
                r.order,
                r.quantity,
                r.label,
                format_value(r.value),
                r.path
            );
        }
        out
    }

    pub fn render_table(&self) -> String {
        let heads = ["scenario", "order", "quantity", "label", "value", "path"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.scenario.clone(),
                    r.order.clone(),
                    r.quantity.clone(),
                    r.label.clone(),
                    format!("{:.6}", r.value),
                    r.path.to_string(),
                ]
            })
            .collect();
        let mut widths = heads.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cols: &[String]| {
            let parts: Vec<String> = cols.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &heads.map(String::from));
        line(&mut out, &widths.map(|w| "-".repeat(w)));
        for row in &cells {
            line(&mut out, row);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

struct Emitter<'a> {
    scenario: &'a str,
    report: Report,
}

impl Emitter<'_> {
    fn row(&mut self, order: &str, quantity: &str, label: String, value: f64, path: &'static str) {
        self.report.rows.push(Row {
            scenario: self.scenario.to_string(),
            order: order.to_string(),
            quantity: quantity.to_string(),
            label,
            value,
            path,
        });
    }
}

fn analyse_instance(
    file: &ScenarioFile,
    inst: &Instance,
    scenario: &str,
    opts: &RunOptions,
) -> Result<Report, RunError> {
    let orders = opts.order.unwrap_or(file.order).tags();
    let mut em = Emitter {
        scenario,
        report: Report::default(),
    };
    let (lb, rb) = (&inst.l_basis, &inst.r_basis);
    let (l, r) = (inst.l.as_str(), inst.r.as_str());

    if file.analyses.contains(&Analysis::Joint) {
        for li in lb.labels() {
            for ri in rb.labels() {
                let p = joint_prob(&inst.rho0, lb, rb, li, ri)?;
                em.row("both", "joint", format!("{li}&{ri}"), p, "analytic");
            }
        }
    }

    if file.analyses.contains(&Analysis::Conditional) {
        for &order in &orders {
            for li in lb.labels() {
                let p = conditional_prob(&inst.rho0, lb, rb, li, r, order)?;
                em.row(order.as_str(), "conditional", format!("{li}|{r}"), p, "analytic");
            }
        }
    }

    let wants_cf = file.analyses.contains(&Analysis::Counterfactual);
    let wants_gap = file.analyses.contains(&Analysis::Gap);
    if wants_cf || wants_gap {
        let rpb = inst.r_prime_basis.clone().expect("validated: r_prime basis present");
        let rp = inst.r_prime.clone().expect("validated: r_prime outcome present");
        let scenario = Scenario::new(inst.rho0.clone(), lb.clone(), rb.clone(), rpb.clone(), OrderTag::RFirst)?;
        let label = format!("{rp}|{r}");
        let cf_orders = if wants_gap {
            OrderTag::BOTH.to_vec()
        } else {
            orders.clone()
        };
        let mut values = Vec::new();
        for order in [OrderTag::RFirst, OrderTag::LFirst] {
            if !cf_orders.contains(&order) {
                continue;
            }
            let v = counterfactual_prob(&scenario.with_order(order), r, &rp)?;
            let closed = match inst.hardy {
                Some(p) if (l, r, rp.as_str()) == (hardy::L, hardy::R, hardy::R_PRIME) => match order {
                    OrderTag::RFirst => Some(closed_form_r_l(p)),
                    OrderTag::LFirst => Some(closed_form_l_r(p)),
                },
                _ => {
                    let rv = rb.vector(r)?;
                    let rpv = rpb.vector(&rp)?;
                    Some(match order {
                        OrderTag::RFirst => pure_r_first(inst.space, &inst.ket, rpv)?,
                        OrderTag::LFirst => pure_l_first(inst.space, &inst.ket, lb, rv, rpv)?,
                    })
                }
            };
            values.push((order, v, closed));
        }
        if wants_cf {
            for &(order, v, closed) in &values {
                if orders.contains(&order) {
                    em.row(order.as_str(), "counterfactual", label.clone(), v, "analytic");
                    if let Some(c) = closed {
                        em.row(order.as_str(), "counterfactual", label.clone(), c, "closed-form");
                    }
                }
            }
        }
        if wants_gap {
            let get = |o: OrderTag| values.iter().find(|x| x.0 == o).expect("both orders evaluated");
            let (lf, rf) = (get(OrderTag::LFirst), get(OrderTag::RFirst));
            em.row("both", "gap", label.clone(), lf.1 - rf.1, "analytic");
            if let (Some(a), Some(b)) = (lf.2, rf.2) {
                em.row("both", "gap", label.clone(), a - b, "closed-form");
            }
        }
    }

    if file.analyses.contains(&Analysis::Reciprocity) {
        let rec = check_reciprocity(inst.space, &inst.ket, lb, rb)?;
        for e in &rec.entries {
            let side = if e.factor == Factor::L { "L" } else { "R" };
            let tag = format!("{side}:{}", e.label);
            match e.status {
                ReciprocityStatus::NullPremise | ReciprocityStatus::NullConclusion => {
                    em.row("both", "reciprocity_null", tag.clone(), 1.0, "analytic");
                    em.report
                        .notes
                        .push(format!("reciprocity {tag}: {:?} (null contraction)", e.status));
                }
                _ => {
                    em.row(
                        "both",
                        "reciprocity_premise",
                        tag.clone(),
                        e.premise_residual.unwrap_or(0.0),
                        "analytic",
                    );
                    em.row(
                        "both",
                        "reciprocity_conclusion",
                        tag.clone(),
                        e.conclusion_residual.unwrap_or(0.0),
                        "analytic",
                    );
                }
            }
        }
        let sym = symmetric_case(inst.space, &inst.ket, lb, rb)?;
        for e in &sym.entries {
            if let Some(res) = e.residual {
                let side = if e.factor == Factor::L { "L" } else { "R" };
                em.row(
                    "both",
                    "symmetric_residual",
                    format!("{side}:{}", e.label),
                    res,
                    "analytic",
                );
            }
        }
        em.report.notes.push(format!(
            "reciprocity {}; symmetric case (all outcomes): {}",
            if rec.holds() { "holds" } else { "VIOLATED" },
            sym.all_symmetric()
        ));
    }

    if file.analyses.contains(&Analysis::MonteCarlo) {
        let (n_file, seed_file) = file.montecarlo.expect("validated: montecarlo table present");
        let n = opts.runs.unwrap_or(n_file);
        let seed = opts.seed.unwrap_or(seed_file);
        for &order in &orders {
            let cfg = RunConfig::new(n, seed, order)?;
            let table = simulate(&inst.rho0, lb, rb, cfg)?;
            for ((li, ri), count) in table.cells() {
                em.row(order.as_str(), "count", format!("{li}&{ri}"), count as f64, "empirical");
            }
            let n_r = table.n_r(r)?;
            for li in lb.labels() {
                let p = empirical_conditional(&table, li, r)?;
                em.row(order.as_str(), "conditional", format!("{li}|{r}"), p, "empirical");
                em.row(
                    order.as_str(),
                    "conditional_sigma",
                    format!("{li}|{r}"),
                    binomial_sigma(n_r, p) / n_r as f64,
                    "empirical",
                );
            }
        }
    }
    Ok(em.report)
}

fn spacetime_report(name: &str, p: &Event, q: &Event) -> Result<Report, RunError> {
    let mut em = Emitter {
        scenario: name,
        report: Report::default(),
    };
    let s = interval(p, q);
    let separated = causally_separated(p, q);
    em.row("both", "interval", "L-R".into(), s, "analytic");
    em.row(
        "both",
        "causally_separated",
        "L-R".into(),
        f64::from(u8::from(separated)),
        "analytic",
    );
    if separated {
        let b = find_order_reversing_boost(p, q)?;
        let v = b.velocity();
        for (axis, c) in ["vx", "vy", "vz"].iter().zip(v) {
            em.row("both", "reversing_boost", axis.to_string(), c, "analytic");
        }
        let (pb, qb) = (b.apply(p), b.apply(q));
        em.row("both", "boosted_dt", "L-R".into(), pb.t - qb.t, "analytic");
        em.report.notes.push(format!(
            "events are causally separated: fiducial t_L - t_R = {:.6}, after boost with speed {:.6} t_L - t_R = {:.6}",
            p.t - q.t,
            b.speed(),
            pb.t - qb.t
        ));
    } else {
        em.report
            .notes
            .push("events are not causally separated: their time order is the same in every frame".into());
    }
    em.report.notes.push(
        "the jump order (l-first / r-first) is an assumption of each row; no frame or coordinate fixes it".into(),
    );
    Ok(em.report)
}

/// Runs every requested analysis, over the sweep grid if one is given.
pub fn run_scenario(file: &ScenarioFile, opts: &RunOptions) -> Result<Report, RunError> {
    let mut report = Report::default();

    if opts.sweeps.is_empty() {
        let inst = file.instance(None)?;
        let r = analyse_instance(file, &inst, &file.name, opts)?;
        report.rows.extend(r.rows);
        report.notes.extend(r.notes);
    } else {
        let StateSpec::Hardy(base) = file.state else {
            return Err(RunError::Invalid("--sweep applies only to the hardy preset".into()));
        };
        let mut alphas = vec![base.alpha()];
        let mut betas = vec![base.beta()];
        for s in &opts.sweeps {
            match s.param {
                SweepParam::Alpha => alphas = s.values(),
                SweepParam::Beta => betas = s.values(),
            }
        }
        let mut grid = Vec::new();
        for &a in &alphas {
            for &b in &betas {
                let p = HardyParams::new(a, b).map_err(|e| RunError::Invalid(format!("--sweep: {e}")))?;
                grid.push(p);
            }
        }
        let parts: Vec<Result<Report, RunError>> = grid
            .par_iter()
            .map(|p| {
                let inst = file.instance(Some(*p))?;
                let name = format!(
                    "{}[alpha={};beta={}]",
                    file.name,
                    format_value(p.alpha()),
                    format_value(p.beta())
                );
                analyse_instance(file, &inst, &name, opts)
            })
            .collect();
        for part in parts {
            let part = part?;
            report.rows.extend(part.rows);
            report.notes.extend(part.notes);
        }
    }

    if let Some((p, q)) = &file.spacetime {
        let r = spacetime_report(&file.name, p, q)?;
        report.rows.extend(r.rows);
        report.notes.extend(r.notes);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        assert_eq!(format_value(5.0 / 6.0), "0.833333333333");
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(1.0 / 6.0), "0.166666666667");
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(100000.0), "100000");
        assert_eq!(format_value(1.5e-7), "1.5e-07");
        assert_eq!(format_value(2.5e13), "2.5e+13");
        assert_eq!(format_value(-0.25), "-0.25");
        assert_eq!(format_value(0.999999999999), "0.999999999999");
        assert_eq!(format_value(0.99999999999999), "1");
    }

    #[test]
    fn line_col_positions() {
        let t = "a = 1\nbb = 2\n";
        assert_eq!(line_col(t, 0), (1, 1));
        assert_eq!(line_col(t, 6), (2, 1));
        assert_eq!(line_col(t, 9), (2, 4));
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("alpha=0.1:0.5:5").unwrap();
        assert_eq!(s.param, SweepParam::Alpha);
        let v = s.values();
        assert_eq!(v.len(), 5);
        assert!((v[4] - 0.5).abs() < 1e-15);
        assert!(Sweep::parse("gamma=0:1:2").is_err());
        assert!(Sweep::parse("beta=0:1").is_err());
        assert!(Sweep::parse("beta=0:1:0").is_err());
    }

    #[test]
    fn order_choice_parsing() {
        assert_eq!(OrderChoice::parse("both"), Some(OrderChoice::Both));
        assert_eq!(OrderChoice::parse("l-first"), Some(OrderChoice::One(OrderTag::LFirst)));
        assert_eq!(OrderChoice::parse("sideways"), None);
    }
}
