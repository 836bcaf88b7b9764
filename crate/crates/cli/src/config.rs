//! Run configuration: loading, validation, defaults and echo.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use blocksep::catalog::{self, CatalogEntry, CatalogError, CaseI, CaseII, Domain, E3Family};
use blocksep::dynamics::{CompareConfig, IntegratorConfig, SignChangePolicy};
use blocksep::model::{build_system, BlockStructure, NaturalBlock, ProbeSet, StackelMatrix};
use blocksep::sampling::{CoordinateBox, DEFAULT_SEED};
use blocksep::{Expression, PhasePoint};
use thiserror::Error;

use crate::ini::{self, Entry, IniError, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Syntax(#[from] IniError),
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { line: Option<usize>, message: String },
    #[error("system definition: {0}")]
    System(#[from] CatalogError),
}

fn invalid(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { line, message: message.into() }
}

/// Pass/fail thresholds applied by the commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Poisson brackets of the integrals.
    pub bracket: f64,
    /// Block-Eisenhart and block-Levi-Civita residuals.
    pub residual: f64,
    pub killing: f64,
    /// Characteristic condition, Haantjes and TSN residuals.
    pub normality: f64,
    /// Relative agreement between coordinate forms of the same integral.
    pub agreement: f64,
    /// Sup discrepancy of projected and reduced orbits.
    pub compare: f64,
    /// Drift of every first integral along a simulated orbit.
    pub drift: f64,
    pub riemann: f64,
    /// Relative error of leaf curvature against its prediction.
    pub leaf: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            bracket: 1e-8,
            residual: 1e-7,
            killing: 1e-10,
            normality: 1e-8,
            agreement: 1e-9,
            compare: 1e-6,
            drift: 1e-7,
            riemann: 1e-6,
            leaf: 1e-6,
        }
    }
}

/// How the system was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Catalog { name: String, params: BTreeMap<String, Value> },
    Inline {
        blocks: Vec<Vec<String>>,
        stackel: Vec<Vec<String>>,
        metrics: Vec<Vec<Vec<String>>>,
        potentials: Vec<String>,
        bounds: Vec<(f64, f64)>,
    },
}

/// The constructed system.
#[derive(Debug, Clone)]
pub enum Resolved {
    System(CatalogEntry),
    Metric(E3Family),
}

impl Resolved {
    pub fn n_blocks(&self) -> usize {
        match self {
            Resolved::System(e) => e.system.n_blocks(),
            Resolved::Metric(_) => 2,
        }
    }
}

/// `S[row][column] += delta` applied to the integrals only (1-based in files).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub row: usize,
    pub column: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub svg: bool,
    /// Uniform output samples for `simulate`.
    pub samples: usize,
    /// Phase-portrait pairs by CSV column name.
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub spec: SystemSpec,
    pub system: Resolved,
    pub initial: Option<PhasePoint>,
    pub t_span: (f64, f64),
    pub integrator: IntegratorConfig,
    /// 0-based block for `compare`.
    pub block: usize,
    pub compare_samples: usize,
    pub policy: SignChangePolicy,
    /// Seeded probe points per check.
    pub points: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub perturb: Option<Perturbation>,
    pub output: OutputSettings,
}

const SECTIONS: [&str; 10] =
    ["system", "domain", "initial", "time", "integrator", "compare", "verify", "thresholds", "perturb", "output"];

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let mut cfg = parse_config(&text)?;
    cfg.source = Some(path.to_path_buf());
    Ok(cfg)
}

/// Typed view of one section that tracks which keys were consumed.
struct Section<'a> {
    name: String,
    map: Option<&'a BTreeMap<String, Entry>>,
    used: Vec<String>,
}

impl<'a> Section<'a> {
    fn new(doc: &'a ini::Document, name: &str) -> Self {
        Self { name: name.to_string(), map: doc.section(name), used: Vec::new() }
    }

    fn get(&mut self, key: &str) -> Option<&'a Entry> {
        self.used.push(key.to_string());
        self.map.and_then(|m| m.get(key))
    }

    fn line(&self) -> Option<usize> {
        self.map.and_then(|m| m.values().map(|e| e.line).min())
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(m) = self.map {
            for (k, e) in m {
                if !self.used.contains(k) {
                    return Err(invalid(Some(e.line), format!("unknown key `{k}` in [{}]", self.name)));
                }
            }
        }
        Ok(())
    }

    fn num(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => as_num(e, key).map(Some),
        }
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let line = self.map.and_then(|m| m.get(key)).map(|e| e.line);
        let v = self.num(key)?.unwrap_or(default);
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(line, format!("`{key}` must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let line = self.map.and_then(|m| m.get(key)).map(|e| e.line);
        match self.num(key)? {
            None => Ok(default),
            Some(v) if v >= 1.0 && v.fract() == 0.0 && v < 1e12 => Ok(v as usize),
            Some(v) => Err(invalid(line, format!("`{key}` must be a positive integer, got {v}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Entry { value: Value::Str(s), .. }) => Ok(Some(s.clone())),
            Some(e) => Err(invalid(Some(e.line), format!("`{key}` must be a quoted string"))),
        }
    }

    fn boolean(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Entry { value: Value::Bool(b), .. }) => Ok(*b),
            Some(e) => Err(invalid(Some(e.line), format!("`{key}` must be true or false"))),
        }
    }

    fn numbers(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => list(e, key)?.iter().map(|v| as_num(&Entry { value: v.clone(), line: e.line }, key)).collect::<Result<_, _>>().map(Some),
        }
    }
}

fn as_num(e: &Entry, key: &str) -> Result<f64, ConfigError> {
    match e.value {
        Value::Num(x) => Ok(x),
        _ => Err(invalid(Some(e.line), format!("`{key}` must be a number"))),
    }
}

fn list<'a>(e: &'a Entry, key: &str) -> Result<&'a [Value], ConfigError> {
    match &e.value {
        Value::List(v) => Ok(v),
        _ => Err(invalid(Some(e.line), format!("`{key}` must be a list"))),
    }
}

/// A list of lists of strings, e.g. a matrix of expressions.
fn string_rows(e: &Entry, key: &str) -> Result<Vec<Vec<String>>, ConfigError> {
    list(e, key)?
        .iter()
        .map(|row| match row {
            Value::List(items) => items
                .iter()
                .map(|v| match v {
                    Value::Str(s) => Ok(s.clone()),
                    Value::Num(x) => Ok(format!("{x:?}")),
                    _ => Err(invalid(Some(e.line), format!("`{key}` entries must be strings or numbers"))),
                })
                .collect(),
            _ => Err(invalid(Some(e.line), format!("`{key}` must be a list of rows"))),
        })
        .collect()
}

fn check_expr(s: &str, what: &str, line: Option<usize>) -> Result<Expression, ConfigError> {
    Expression::parse(s).map_err(|e| invalid(line, format!("{what}: {e}")))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc = ini::parse(text)?;
    for name in doc.section_names() {
        let known = SECTIONS.contains(&name) || name.strip_prefix("block.").is_some_and(|n| n.parse::<usize>().is_ok());
        if !known {
            let line = doc.section(name).and_then(|m| m.values().map(|e| e.line).min());
            return Err(invalid(line, format!("unknown section [{name}]")));
        }
    }

    let mut sys = Section::new(&doc, "system");
    let catalog_name = sys.string("catalog")?;
    let (spec, system) = match catalog_name {
        Some(name) => {
            let params = ["omega", "alpha", "preset", "c0", "c1", "c2", "c3", "f"]
                .iter()
                .filter_map(|k| sys.get(k).map(|e| (k.to_string(), e.value.clone())))
                .collect::<BTreeMap<_, _>>();
            let line = sys.line();
            let resolved = resolve_catalog(&name, &params).map_err(|e| match e {
                ConfigError::Invalid { line: None, message } => ConfigError::Invalid { line, message },
                other => other,
            })?;
            sys.finish()?;
            (SystemSpec::Catalog { name, params }, resolved)
        }
        None => {
            let (spec, entry) = inline_system(&doc, &mut sys)?;
            sys.finish()?;
            (spec, Resolved::System(entry))
        }
    };

    let mut init = Section::new(&doc, "initial");
    let q = init.numbers("q")?;
    let p = init.numbers("p")?;
    let init_line = init.line();
    init.finish()?;
    let initial = match (&system, q, p) {
        (Resolved::System(e), q, p) => {
            let n = e.system.dim();
            let q = q.or_else(|| Some(e.initial.q.clone()).filter(|_| !matches!(spec, SystemSpec::Inline { .. })));
            match q {
                None => None,
                Some(q) => {
                    let p = p.unwrap_or_else(|| if matches!(spec, SystemSpec::Catalog { .. }) && q == e.initial.q { e.initial.p.clone() } else { vec![0.0; n] });
                    if q.len() != n || p.len() != n {
                        return Err(invalid(init_line, format!("initial q and p need {n} components each")));
                    }
                    Some(PhasePoint::new(q, p))
                }
            }
        }
        (Resolved::Metric(_), None, None) => None,
        (Resolved::Metric(_), _, _) => return Err(invalid(init_line, "metric families take no initial conditions")),
    };

    let mut time = Section::new(&doc, "time");
    let t0 = time.num("start")?.unwrap_or(0.0);
    let t1 = time.num("end")?.unwrap_or(30.0);
    let time_line = time.line();
    time.finish()?;
    if !(t1 != t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(invalid(time_line, "time span must be finite and non-empty"));
    }

    let mut integ = Section::new(&doc, "integrator");
    let defaults = IntegratorConfig::default();
    let mut integrator = IntegratorConfig::with_tolerances(integ.positive("rtol", defaults.rtol)?, integ.positive("atol", defaults.atol)?);
    integrator.max_step = integ.num("max_step")?;
    integrator.max_steps = integ.count("max_steps", defaults.max_steps)?;
    integ.finish()?;

    let mut cmp = Section::new(&doc, "compare");
    let block_line = cmp.map.and_then(|m| m.get("block")).map(|e| e.line);
    let block = cmp.count("block", 1)? - 1;
    if block >= system.n_blocks() {
        return Err(invalid(block_line, format!("block {} out of range 1..={}", block + 1, system.n_blocks())));
    }
    let compare_samples = cmp.count("samples", CompareConfig::default().samples)?;
    let policy_line = cmp.map.and_then(|m| m.get("policy")).map(|e| e.line);
    let policy = match cmp.string("policy")?.as_deref() {
        None | Some("full") => SignChangePolicy::FullRange,
        Some("initial-segment") => SignChangePolicy::RestrictToInitialSegment,
        Some(other) => return Err(invalid(policy_line, format!("policy must be \"full\" or \"initial-segment\", got \"{other}\""))),
    };
    cmp.finish()?;

    let mut ver = Section::new(&doc, "verify");
    let points = ver.count("points", 100)?;
    let seed = ver.num("seed")?.map(|s| s as u64).unwrap_or(DEFAULT_SEED);
    ver.finish()?;

    let mut th = Section::new(&doc, "thresholds");
    let d = Thresholds::default();
    let thresholds = Thresholds {
        bracket: th.positive("bracket", d.bracket)?,
        residual: th.positive("residual", d.residual)?,
        killing: th.positive("killing", d.killing)?,
        normality: th.positive("normality", d.normality)?,
        agreement: th.positive("agreement", d.agreement)?,
        compare: th.positive("compare", d.compare)?,
        drift: th.positive("drift", d.drift)?,
        riemann: th.positive("riemann", d.riemann)?,
        leaf: th.positive("leaf", d.leaf)?,
    };
    th.finish()?;

    let mut pert = Section::new(&doc, "perturb");
    let perturb = match pert.map {
        None => None,
        Some(_) => {
            let line = pert.line();
            let n = system.n_blocks();
            let row = pert.count("row", 1)?;
            let column = pert.count("column", 1)?;
            let delta = pert.num("delta")?.ok_or_else(|| invalid(line, "[perturb] needs `delta`"))?;
            if row > n || column > n {
                return Err(invalid(line, format!("perturbed entry ({row}, {column}) outside the {n}×{n} Stäckel matrix")));
            }
            if matches!(system, Resolved::Metric(_)) {
                return Err(invalid(line, "metric families have no Stäckel matrix to perturb"));
            }
            Some(Perturbation { row: row - 1, column: column - 1, delta })
        }
    };
    pert.finish()?;

    let mut out = Section::new(&doc, "output");
    let dir = PathBuf::from(out.string("dir")?.unwrap_or_else(|| "out".into()));
    let svg = out.boolean("svg", false)?;
    let samples = out.count("samples", 1001)?.max(2);
    let pairs = match out.get("pairs") {
        None => default_pairs(&system),
        Some(e) => string_rows(e, "pairs")?
            .into_iter()
            .map(|r| match r.as_slice() {
                [a, b] => Ok((a.clone(), b.clone())),
                _ => Err(invalid(Some(e.line), "each phase-portrait pair needs two names")),
            })
            .collect::<Result<_, _>>()?,
    };
    out.finish()?;

    Ok(RunConfig {
        source: None,
        spec,
        system,
        initial,
        t_span: (t0, t1),
        integrator,
        block,
        compare_samples,
        policy,
        points,
        seed,
        thresholds,
        perturb,
        output: OutputSettings { dir, svg, samples, pairs },
    })
}

fn default_pairs(system: &Resolved) -> Vec<(String, String)> {
    match system {
        Resolved::System(e) => e.system.structure().names().iter().map(|q| (q.clone(), crate::commands::momentum_name(q))).collect(),
        Resolved::Metric(_) => Vec::new(),
    }
}

fn param_num(params: &BTreeMap<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Num(x)) => Ok(Some(*x)),
        Some(_) => Err(invalid(None, format!("`{key}` must be a number"))),
    }
}

fn param_list(params: &BTreeMap<String, Value>, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::List(v)) => v
            .iter()
            .map(|x| match x {
                Value::Num(x) => Ok(*x),
                _ => Err(invalid(None, format!("`{key}` must be a list of numbers"))),
            })
            .collect::<Result<_, _>>()
            .map(Some),
        Some(_) => Err(invalid(None, format!("`{key}` must be a list of numbers"))),
    }
}

fn resolve_catalog(name: &str, params: &BTreeMap<String, Value>) -> Result<Resolved, ConfigError> {
    let allowed: &[&str] = match name {
        "oscillators" => &["omega", "alpha"],
        "e3-case-i" => &["preset", "c0", "c1", "c2", "c3", "f"],
        "e3-case-ii" => &["preset", "c1", "c2", "f"],
        _ => &[],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(None, format!("`{k}` is not a parameter of {name}")));
    }
    let f = match params.get("f") {
        None => None,
        Some(Value::Str(s)) => Some(check_expr(s, "f", None)?),
        Some(_) => return Err(invalid(None, "`f` must be a quoted expression")),
    };
    let preset = match params.get("preset") {
        None => None,
        Some(Value::Str(s)) => Some(s.as_str()),
        Some(_) => return Err(invalid(None, "`preset` must be a quoted string")),
    };
    Ok(match name {
        "oscillators" => {
            let omega = param_list(params, "omega")?.unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
            let alpha = param_list(params, "alpha")?.unwrap_or_else(|| omega.iter().map(|w| 1.0 / w).collect());
            Resolved::System(catalog::oscillators(&omega, &alpha)?)
        }
        "e3-case-i" | "e3-case-ii" => {
            let case_i = name == "e3-case-i";
            let base = match (case_i, preset) {
                (true, None | Some("flat")) => CaseI::flat(),
                (true, Some("curved")) => CaseI::curved(),
                (false, None | Some("sphere")) => CaseII::sphere(),
                (false, Some("plane")) => CaseII::plane(),
                (_, Some(p)) => return Err(invalid(None, format!("unknown preset \"{p}\" for {name}"))),
            };
            let kind = base.kind;
            let c = |k: &str, d: f64| param_num(params, k).map(|v| v.unwrap_or(d));
            let f = f.unwrap_or_else(|| base.f.clone());
            let fam = match kind {
                catalog::E3Kind::CaseI { c0, c1, c2, c3 } => catalog::e3_case_i(c("c0", c0)?, c("c1", c1)?, c("c2", c2)?, c("c3", c3)?, f)?,
                catalog::E3Kind::CaseII { c1, c2 } => catalog::e3_case_ii(c("c1", c1)?, c("c2", c2)?, f)?,
            };
            Resolved::Metric(fam)
        }
        other => match catalog::lookup(other)? {
            catalog::Entry::System(e) => Resolved::System(e),
            catalog::Entry::Metric(m) => Resolved::Metric(m),
        },
    })
}

fn inline_system(doc: &ini::Document, sys: &mut Section<'_>) -> Result<(SystemSpec, CatalogEntry), ConfigError> {
    let line = sys.line();
    let blocks_e = sys.get("blocks").ok_or_else(|| invalid(line, "[system] needs `catalog` or `blocks` and `stackel`"))?;
    let blocks = string_rows(blocks_e, "blocks")?;
    let stackel_e = sys.get("stackel").ok_or_else(|| invalid(line, "[system] needs `stackel`"))?;
    let stackel_rows = string_rows(stackel_e, "stackel")?;
    let n = blocks.len();
    let structure = BlockStructure::new(blocks.clone()).map_err(|e| invalid(Some(blocks_e.line), e.to_string()))?;
    for (r, row) in stackel_rows.iter().enumerate() {
        for (a, s) in row.iter().enumerate() {
            check_expr(s, &format!("Stäckel entry S[{}][{}]", r + 1, a + 1), Some(stackel_e.line))?;
        }
    }
    let stackel = StackelMatrix::parse(&stackel_rows).map_err(|e| invalid(Some(stackel_e.line), e.to_string()))?;

    let mut metrics = Vec::with_capacity(n);
    let mut potentials = Vec::with_capacity(n);
    let mut natural = Vec::with_capacity(n);
    for r in 0..n {
        let name = format!("block.{}", r + 1);
        let mut sec = Section::new(doc, &name);
        let sec_line = sec.line().or(line);
        let m = structure.size(r);
        let metric = match sec.get("metric") {
            Some(e) => string_rows(e, "metric")?,
            None => (0..m).map(|i| (0..m).map(|j| if i == j { "1".to_string() } else { "0".to_string() }).collect()).collect(),
        };
        let potential = sec.string("potential")?.unwrap_or_else(|| "0".into());
        let grid = metric
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| check_expr(s, &format!("metric of block {} ({},{})", r + 1, i + 1, j + 1), sec_line))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let v = check_expr(&potential, &format!("potential of block {}", r + 1), sec_line)?;
        natural.push(NaturalBlock::new(grid, v).map_err(|e| invalid(sec_line, e.to_string()))?);
        sec.finish()?;
        metrics.push(metric);
        potentials.push(potential);
    }
    if let Some(extra) = doc.section_names().filter_map(|s| s.strip_prefix("block.")).find(|s| s.parse::<usize>().map_or(true, |k| k == 0 || k > n)) {
        return Err(invalid(None, format!("[block.{extra}] does not match any of the {n} blocks")));
    }

    let mut dom = Section::new(doc, "domain");
    let dim = structure.dim();
    let bounds = match dom.get("bounds") {
        None => vec![(-1.0, 1.0); dim],
        Some(e) => {
            let rows = list(e, "bounds")?;
            let b = rows
                .iter()
                .map(|r| match r {
                    Value::List(v) if v.len() == 2 => match (&v[0], &v[1]) {
                        (Value::Num(lo), Value::Num(hi)) if lo <= hi => Ok((*lo, *hi)),
                        _ => Err(invalid(Some(e.line), "each bound is [lo, hi] with lo ≤ hi")),
                    },
                    _ => Err(invalid(Some(e.line), "each bound is [lo, hi]")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if b.len() != dim {
                return Err(invalid(Some(e.line), format!("`bounds` needs {dim} intervals, got {}", b.len())));
            }
            b
        }
    };
    dom.finish()?;

    let region = CoordinateBox::new(bounds.clone());
    let centre: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let probes = ProbeSet::points(vec![centre.clone()]).with_region(region.clone());
    let system = Arc::new(build_system(structure, stackel, natural, probes).map_err(CatalogError::from)?);
    let s = system.clone();
    let domain = Domain::new(region, "inline bounds, cond(S) ≤ 1e8, |α^r| ≥ 1e-3", move |q| match s.twist_rows(q) {
        Ok(ci) => ci.cond <= 1e8 && ci.inverse.row(0).iter().all(|a| a.abs() >= 1e-3),
        Err(_) => false,
    });
    let entry = CatalogEntry {
        name: "inline".into(),
        system,
        initial: PhasePoint::at_rest(centre),
        domain,
        cartesian: None,
        solution: None,
    };
    Ok((SystemSpec::Inline { blocks, stackel: stackel_rows, metrics, potentials, bounds }, entry))
}

fn strings(v: &[String]) -> String {
    Value::List(v.iter().map(|s| Value::Str(s.clone())).collect()).to_string()
}

fn rows(v: &[Vec<String>]) -> String {
    Value::List(v.iter().map(|r| Value::List(r.iter().map(|s| Value::Str(s.clone())).collect())).collect()).to_string()
}

fn nums(v: &[f64]) -> String {
    Value::List(v.iter().map(|x| Value::Num(*x)).collect()).to_string()
}

impl RunConfig {
    /// The resolved configuration, defaults included, in the input format.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(src) = &self.source {
            let _ = writeln!(s, "# source: {}", src.display());
        }
        s.push_str("[system]\n");
        match &self.spec {
            SystemSpec::Catalog { name, params } => {
                let _ = writeln!(s, "catalog = \"{name}\"");
                for (k, v) in params {
                    let _ = writeln!(s, "{k} = {v}");
                }
                if let Resolved::Metric(m) = &self.system {
                    let _ = writeln!(s, "# resolved: {:?}, f = \"{}\"", m.kind, m.f);
                }
            }
            SystemSpec::Inline { blocks, stackel, metrics, potentials, bounds } => {
                let _ = writeln!(s, "blocks = {}", rows(blocks));
                let _ = writeln!(s, "stackel = {}", rows(stackel));
                for (r, (m, v)) in metrics.iter().zip(potentials).enumerate() {
                    let _ = writeln!(s, "\n[block.{}]\nmetric = {}\npotential = {}", r + 1, rows(m), Value::Str(v.clone()));
                }
                let b: Vec<Value> = bounds.iter().map(|(lo, hi)| Value::List(vec![Value::Num(*lo), Value::Num(*hi)])).collect();
                let _ = writeln!(s, "\n[domain]\nbounds = {}", Value::List(b));
            }
        }
        if let Some(p0) = &self.initial {
            let _ = writeln!(s, "\n[initial]\nq = {}\np = {}", nums(&p0.q), nums(&p0.p));
        }
        let _ = writeln!(s, "\n[time]\nstart = {:?}\nend = {:?}", self.t_span.0, self.t_span.1);
        let _ = writeln!(
            s,
            "\n[integrator]\nrtol = {:?}\natol = {:?}\nmax_steps = {}",
            self.integrator.rtol, self.integrator.atol, self.integrator.max_steps
        );
        if let Some(h) = self.integrator.max_step {
            let _ = writeln!(s, "max_step = {h:?}");
        }
        let policy = match self.policy {
            SignChangePolicy::FullRange => "full",
            SignChangePolicy::RestrictToInitialSegment => "initial-segment",
        };
        let _ = writeln!(s, "\n[compare]\nblock = {}\nsamples = {}\npolicy = \"{policy}\"", self.block + 1, self.compare_samples);
        let _ = writeln!(s, "\n[verify]\npoints = {}\nseed = {}", self.points, self.seed);
        let t = &self.thresholds;
        let _ = writeln!(
            s,
            "\n[thresholds]\nbracket = {:?}\nresidual = {:?}\nkilling = {:?}\nnormality = {:?}\nagreement = {:?}\ncompare = {:?}\ndrift = {:?}\nriemann = {:?}\nleaf = {:?}",
            t.bracket, t.residual, t.killing, t.normality, t.agreement, t.compare, t.drift, t.riemann, t.leaf
        );
        if let Some(p) = &self.perturb {
            let _ = writeln!(s, "\n[perturb]\nrow = {}\ncolumn = {}\ndelta = {:?}", p.row + 1, p.column + 1, p.delta);
        }
        let pairs: Vec<Vec<String>> = self.output.pairs.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
        let _ = writeln!(
            s,
            "\n[output]\ndir = {}\nsvg = {}\nsamples = {}\npairs = {}",
            Value::Str(self.output.dir.display().to_string()),
            self.output.svg,
            self.output.samples,
            rows(&pairs)
        );
        let _ = strings;
        s
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig { integrator: self.integrator, samples: self.compare_samples, policy: self.policy }
    }
}
