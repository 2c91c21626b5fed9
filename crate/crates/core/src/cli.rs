//! Problem files and output rendering for the command-line front end.

use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::diffpriv::{two_semichains_from_division_sequences, differential_graph, enumerate_division_sequences, DimensionSpec};
use crate::error::{Error, Result};
use crate::feasible::{violated_edges, Budget, EdgeViolation, Posterior, Prior};
use crate::graph::{Graph, StateSpace};
use crate::oracle::CrossCheckReport;
use crate::rational::{approximate_exp, format_rational, format_significant, parse_rational, to_f64, Rational};
use crate::semichain::{enumerate_two_semichains, Enumeration, SemiChain};
use crate::signals::Signal;

/// Problem file as written on disk (JSON).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub states: StatesSpec,
    #[serde(default)]
    pub prior: PriorSpec,
    pub budget: BudgetSpec,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StatesSpec {
    Count(usize),
    Labels(Vec<String>),
    Dims { dims: Vec<usize> },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(untagged)]
pub enum PriorSpec {
    /// Only `"uniform"` is recognised.
    Named(String),
    Probs(Vec<NumberText>),
    #[default]
    #[serde(skip)]
    Uniform,
}

/// A rational written as `"p/q"`, a decimal string, or a JSON integer.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberText {
    Text(String),
    Int(i64),
}

impl NumberText {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            NumberText::Text(s) => parse_rational(s),
            NumberText::Int(n) => Ok(crate::rational::int(*n)),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BudgetSpec {
    T { t: NumberText },
    Epsilon { epsilon: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSpec {
    Complete,
    Differential,
    Custom { edges: Vec<(Endpoint, Endpoint)> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Index(usize),
    Label(String),
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub graph: Graph,
    pub prior: Prior,
    pub budget: Budget,
    pub dims: Option<DimensionSpec>,
    /// Set when `t` was derived from a decimal epsilon.
    pub epsilon: Option<f64>,
}

impl Problem {
    pub fn from_file(file: ProblemFile) -> Result<Self> {
        let (states, dims) = match file.states {
            StatesSpec::Count(n) => (StateSpace::numbered(n)?, None),
            StatesSpec::Labels(labels) => (StateSpace::new(labels)?, None),
            StatesSpec::Dims { dims } => {
                let d = DimensionSpec::new(dims)?;
                (d.state_space(), Some(d))
            }
        };
        let n = states.len();
        let graph = match (file.graph, &dims) {
            (Some(GraphSpec::Differential), Some(d)) | (None, Some(d)) => differential_graph(d),
            (Some(GraphSpec::Differential), None) => {
                return Err(Error::Parse("a differential graph needs `states: {\"dims\": [...]}`".into()))
            }
            (Some(GraphSpec::Complete), _) | (None, None) => Graph::complete(states),
            (Some(GraphSpec::Custom { edges }), _) => {
                let resolve = |e: &Endpoint| match e {
                    Endpoint::Index(i) => Ok(*i),
                    Endpoint::Label(l) => states.index_of(l),
                };
                let pairs =
                    edges.iter().map(|(a, b)| Ok((resolve(a)?, resolve(b)?))).collect::<Result<Vec<_>>>()?;
                Graph::build(states, &pairs)?
            }
        };
        let prior = match file.prior {
            PriorSpec::Uniform => Prior::uniform(n)?,
            PriorSpec::Named(name) if name == "uniform" => Prior::uniform(n)?,
            PriorSpec::Named(name) => return Err(Error::Parse(format!("unknown prior `{name}`"))),
            PriorSpec::Probs(probs) => {
                if probs.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: probs.len() });
                }
                Prior::new(probs.iter().map(NumberText::to_rational).collect::<Result<Vec<_>>>()?)?
            }
        };
        let (budget, epsilon) = match file.budget {
            BudgetSpec::T { t } => (Budget::new(t.to_rational()?)?, None),
            BudgetSpec::Epsilon { epsilon } => {
                if !epsilon.is_finite() || epsilon < 0.0 {
                    return Err(Error::InvalidBudget(format!("epsilon = {epsilon}")));
                }
                (Budget::new(approximate_exp(epsilon))?, Some(epsilon))
            }
        };
        Ok(Self { graph, prior, budget, dims, epsilon })
    }

    pub fn states(&self) -> &StateSpace {
        self.graph.states()
    }
}

/// Parses a JSON problem file.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Problem::from_file(file)
}

/// Parses `"p1/q1,p2/q2,..."` as a posterior over `n` states.
pub fn parse_posterior(text: &str, n: usize) -> Result<Posterior> {
    let probs = text.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
    if probs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: probs.len() });
    }
    Posterior::new(probs)
}

/// Parses levels separated by `|`, with space-separated state labels: `"00 11 | 01 10"`.
pub fn parse_chain(text: &str, states: &StateSpace) -> Result<SemiChain> {
    let levels: Vec<Vec<&str>> = text.split('|').map(|l| l.split_whitespace().collect()).collect();
    SemiChain::from_labels(states, &levels)
}

/// Exact `"p/q"` strings, or decimals with 12 significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberMode {
    #[default]
    Exact,
    Float,
}

fn number(r: &Rational, mode: NumberMode) -> Value {
    match mode {
        NumberMode::Exact => Value::String(format_rational(r)),
        NumberMode::Float => {
            let text = format_significant(to_f64(r), 12);
            serde_json::from_str(&text).unwrap_or(Value::String(text))
        }
    }
}

fn number_text(r: &Rational, mode: NumberMode) -> String {
    match mode {
        NumberMode::Exact => format_rational(r),
        NumberMode::Float => format_significant(to_f64(r), 12),
    }
}

fn vector(v: &[Rational], mode: NumberMode) -> Value {
    Value::Array(v.iter().map(|r| number(r, mode)).collect())
}

fn budget_json(p: &Problem) -> Value {
    let mut out = json!({ "t": format_rational(p.budget.t()), "t_approximate": p.epsilon.is_some() });
    if let Some(eps) = p.epsilon {
        out["epsilon"] = json!(eps);
    }
    out
}

fn chain_json(c: &SemiChain, states: &StateSpace) -> Value {
    json!(c.labeled_levels(states))
}

/// Output switches for `enumerate`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerateView {
    pub chains_only: bool,
    pub numbers: NumberMode,
}

pub fn enumeration_json(p: &Problem, e: &Enumeration, view: EnumerateView) -> Value {
    let states = p.states();
    let records: Vec<Value> = match e {
        Enumeration::Degenerate(mu) => {
            let mut r = json!({ "levels": Value::Null, "num_levels": 1 });
            if !view.chains_only {
                r["posterior"] = vector(mu.probs(), view.numbers);
            }
            vec![r]
        }
        Enumeration::Extreme { records, .. } => records
            .iter()
            .map(|rec| {
                let mut r = json!({
                    "levels": chain_json(&rec.chain, states),
                    "num_levels": rec.chain.num_levels(),
                });
                if !view.chains_only {
                    r["posterior"] = vector(rec.posterior.probs(), view.numbers);
                }
                r
            })
            .collect(),
    };
    let collisions: Vec<Value> =
        e.collisions().iter().map(|group| Value::Array(group.iter().map(|c| chain_json(c, states)).collect())).collect();
    json!({
        "states": states.labels(),
        "budget": budget_json(p),
        "degenerate": e.is_degenerate(),
        "count": e.len(),
        "records": records,
        "collisions": collisions,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn enumeration_csv(p: &Problem, e: &Enumeration, view: EnumerateView) -> String {
    let states = p.states();
    let mut out = String::from("index,num_levels,chain");
    if !view.chains_only {
        for l in states.labels() {
            out.push(',');
            out.push_str(&csv_field(l));
        }
    }
    out.push('\n');
    let mut row = |k: usize, levels: usize, chain: String, mu: &Posterior| {
        let _ = write!(out, "{k},{levels},{}", csv_field(&chain));
        if !view.chains_only {
            for x in mu.probs() {
                let _ = write!(out, ",{}", number_text(x, view.numbers));
            }
        }
        out.push('\n');
    };
    match e {
        Enumeration::Degenerate(mu) => row(0, 1, String::new(), mu),
        Enumeration::Extreme { records, .. } => {
            for (k, rec) in records.iter().enumerate() {
                row(k, rec.chain.num_levels(), rec.chain.display(states).to_string(), &rec.posterior);
            }
        }
    }
    out
}

/// Reads back the chains (and posteriors, if present) from [`enumeration_json`] output.
pub fn parse_enumeration_json(value: &Value, states: &StateSpace) -> Result<Vec<(SemiChain, Option<Posterior>)>> {
    let bad = |what: &str| Error::Parse(format!("enumeration JSON: {what}"));
    let records = value["records"].as_array().ok_or_else(|| bad("missing records"))?;
    records
        .iter()
        .map(|r| {
            let levels = r["levels"].as_array().ok_or_else(|| bad("missing levels"))?;
            let levels: Vec<Vec<&str>> = levels
                .iter()
                .map(|l| {
                    l.as_array()
                        .ok_or_else(|| bad("level is not a list"))?
                        .iter()
                        .map(|s| s.as_str().ok_or_else(|| bad("label is not a string")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            let chain = SemiChain::from_labels(states, &levels)?;
            let posterior = match r.get("posterior") {
                None => None,
                Some(Value::Array(xs)) => Some(Posterior::new(
                    xs.iter()
                        .map(|x| x.as_str().ok_or_else(|| bad("posterior entries must be exact")).and_then(parse_rational))
                        .collect::<Result<Vec<_>>>()?,
                )?),
                Some(_) => return Err(bad("posterior is not a list")),
            };
            Ok((chain, posterior))
        })
        .collect()
}

/// Agreement between division sequences and direct enumeration on a two-coordinate grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionCheck {
    pub sequences: usize,
    pub chains: usize,
    pub agrees: bool,
}

pub fn division_check(p: &Problem) -> Result<Option<DivisionCheck>> {
    let Some(dims) = p.dims.as_ref().filter(|d| d.k() == 2) else {
        return Ok(None);
    };
    let (n1, n2) = (dims.sizes()[0], dims.sizes()[1]);
    if n2 > 6 {
        return Ok(None);
    }
    let sequences = enumerate_division_sequences(n1, n2)?.len();
    let chains = two_semichains_from_division_sequences(n1, n2)?;
    let agrees = chains == enumerate_two_semichains(&p.graph);
    Ok(Some(DivisionCheck { sequences, chains: chains.len(), agrees }))
}

pub fn report_json(p: &Problem, r: &CrossCheckReport, division: Option<&DivisionCheck>) -> Value {
    let states = p.states();
    let posts = |v: &[Posterior]| Value::Array(v.iter().map(|m| vector(m.probs(), NumberMode::Exact)).collect());
    let mut out = json!({
        "status": if r.is_match() { "MATCH" } else { "MISMATCH" },
        "budget": budget_json(p),
        "oracle_vertices": r.oracle_vertices.len(),
        "chain_vertices": r.chain_vertices.len(),
        "chains": r.chain_count,
        "missing_from_chains": posts(&r.missing_from_chains),
        "extra_in_chains": posts(&r.extra_in_chains),
        "collisions": r.chain_collisions.iter()
            .map(|g| Value::Array(g.iter().map(|c| chain_json(c, states)).collect()))
            .collect::<Vec<_>>(),
    });
    if let Some(d) = division {
        out["division_sequences"] = json!({ "sequences": d.sequences, "chains": d.chains, "agrees": d.agrees });
    }
    out
}

pub fn report_text(p: &Problem, r: &CrossCheckReport, division: Option<&DivisionCheck>) -> String {
    let mut out = String::new();
    if r.is_match() {
        let _ = writeln!(out, "MATCH, {} vertices", r.oracle_vertices.len());
    } else {
        let _ = writeln!(
            out,
            "MISMATCH, {} oracle vertices, {} chain vertices",
            r.oracle_vertices.len(),
            r.chain_vertices.len()
        );
        for mu in &r.missing_from_chains {
            let _ = writeln!(out, "  missing from chains: {mu}");
        }
        for mu in &r.extra_in_chains {
            let _ = writeln!(out, "  extra in chains: {mu}");
        }
        for group in &r.chain_collisions {
            let shown: Vec<String> = group.iter().map(|c| c.display(p.states()).to_string()).collect();
            let _ = writeln!(out, "  collision: {}", shown.join(" "));
        }
    }
    if let Some(d) = division {
        let verdict = if d.agrees { "agree" } else { "DISAGREE" };
        let _ = writeln!(
            out,
            "division sequences: {} sequences, {} chains, {verdict} with direct enumeration",
            d.sequences, d.chains
        );
    }
    out
}

pub fn signal_json(mu: &Posterior, s: &Signal, numbers: NumberMode) -> Value {
    let support: Vec<Value> = s
        .support()
        .iter()
        .zip(s.weights())
        .map(|(v, w)| json!({ "weight": number(w, numbers), "posterior": vector(v.probs(), numbers) }))
        .collect();
    let total: Rational = s.weights().iter().sum();
    json!({
        "posterior": vector(mu.probs(), numbers),
        "support": support,
        "weight_sum": number(&total, numbers),
    })
}

pub fn signal_csv(states: &StateSpace, s: &Signal, numbers: NumberMode) -> String {
    let mut out = String::from("weight");
    for l in states.labels() {
        out.push(',');
        out.push_str(&csv_field(l));
    }
    out.push('\n');
    for (v, w) in s.support().iter().zip(s.weights()) {
        out.push_str(&number_text(w, numbers));
        for x in v.probs() {
            out.push(',');
            out.push_str(&number_text(x, numbers));
        }
        out.push('\n');
    }
    out
}

/// Human-readable list of violated edge bounds.
pub fn describe_violations(p: &Problem, mu: &Posterior) -> String {
    let states = p.states();
    violated_edges(mu, &p.prior, &p.graph, &p.budget)
        .iter()
        .map(|EdgeViolation { from, to, quotient }| {
            let (a, b) = (states.label(*from), states.label(*to));
            match quotient {
                Some(q) => format!("edge {a}->{b}: ratio {} exceeds t = {}", format_rational(q), p.budget.t()),
                None => format!("edge {a}->{b}: no mass on {a} but positive mass on {b}"),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn graph_json(p: &Problem, chain: Option<&SemiChain>) -> Value {
    let states = p.states();
    let edges: Vec<Value> =
        p.graph.edges().iter().map(|&(a, b)| json!([states.label(a), states.label(b)])).collect();
    let mut out = json!({ "nodes": states.labels(), "edges": edges });
    if let Some(c) = chain {
        out["levels"] = chain_json(c, states);
    }
    out
}

fn dot_id(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT; with a chain, one `rank=same` group per level, bottom to top.
pub fn graph_dot(p: &Problem, chain: Option<&SemiChain>) -> String {
    let states = p.states();
    let mut out = String::from("graph privacy {\n");
    if chain.is_some() {
        out.push_str("  rankdir=BT;\n");
    }
    for l in states.labels() {
        let _ = writeln!(out, "  {};", dot_id(l));
    }
    if let Some(c) = chain {
        for (k, level) in c.levels().iter().enumerate() {
            let members: Vec<String> = level.iter().map(|&s| dot_id(states.label(s))).collect();
            let _ = writeln!(out, "  {{ rank=same; /* level {} */ {}; }}", k + 1, members.join("; "));
        }
    }
    let level = chain.map(SemiChain::level_of);
    for &(a, b) in p.graph.edges() {
        let style = match &level {
            Some(l) if l[a] == l[b] => " [style=dashed]",
            _ => "",
        };
        let _ = writeln!(out, "  {} -- {}{style};", dot_id(states.label(a)), dot_id(states.label(b)));
    }
    out.push_str("}\n");
    out
}
