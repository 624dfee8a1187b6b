//! Suite configuration and the (function × inequality) runner.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use rearr_core::inequalities::DerivativeForm;
use rearr_core::{
    run_check, CheckReport, ConstantMode, GradientMode, GridFunction, InequalityId,
    InequalityParams, ProfileHandle,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{generate_corpus, read_corpus, CorpusSpec, LoadedItem};
use crate::error::{read_to_string, CliError, Result};
use crate::formats::{read_grid, read_profile, Real};

fn from_str<'de, D, T>(d: D) -> std::result::Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: Display,
{
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn display<S: Serializer, T: Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// A scalar or a list in TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityEntry {
    #[serde(deserialize_with = "from_str", serialize_with = "display")]
    pub id: InequalityId,
    pub p: OneOrMany,
    /// Defaults to the grid dimension of each function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub pointwise: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nash_constants: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_max: Option<f64>,
    /// Profile file for `φ`; the Euclidean one otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PathBuf>,
}

impl InequalityEntry {
    pub fn new(id: InequalityId, p: &[f64]) -> Self {
        Self {
            id,
            p: OneOrMany::Many(p.to_vec()),
            n: None,
            tolerance: None,
            derivative_factor: None,
            pointwise: false,
            chain_exponent: None,
            nash_constants: None,
            lattice_points: None,
            lattice_max: None,
            phi: None,
        }
    }
}

/// Where the functions come from. With nothing set the built-in default
/// corpus is generated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<CorpusSpec>,
    /// Directory written by the `corpus` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Extra function files.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default, deserialize_with = "from_str", serialize_with = "display")]
    pub gradient_mode: GradientMode,
    #[serde(default, deserialize_with = "from_str", serialize_with = "display")]
    pub constant_mode: ConstantMode,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: u32,
    /// Keep per-t traces for plot-ready CSV.
    #[serde(default)]
    pub detail: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub corpus: CorpusSource,
    #[serde(rename = "inequality", default)]
    pub inequalities: Vec<InequalityEntry>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn default_tolerance() -> f64 {
    0.05
}

fn default_ppd() -> u32 {
    64
}

impl Default for SuiteConfig {
    /// Every function checker at the exponents the acceptance runs use.
    fn default() -> Self {
        let ps = [1.0, 1.5, 2.0, 3.0];
        let e = InequalityEntry::new;
        Self {
            gradient_mode: GradientMode::MetricMax,
            constant_mode: ConstantMode::PaperConstant,
            tolerance: default_tolerance(),
            points_per_decade: default_ppd(),
            detail: true,
            out: None,
            corpus: CorpusSource::default(),
            inequalities: vec![
                e(InequalityId::SPhiP, &ps),
                e(InequalityId::OscillationP, &ps),
                e(InequalityId::DerivativeP, &ps),
                e(InequalityId::PolyaSzego, &[1.0, 2.0]),
                e(InequalityId::ChainRule, &[2.0]),
                e(InequalityId::ONeil, &[1.5, 2.0]),
                e(InequalityId::Nash, &[2.0]),
                e(InequalityId::SobolevWeak, &[1.0, 1.5]),
                e(InequalityId::SobolevStrong, &[1.0, 1.5]),
                e(InequalityId::SobolevExp, &[2.0]),
                e(
                    InequalityId::LemmaDes,
                    &[1.1, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.7],
                ),
            ],
        }
    }
}

impl SuiteConfig {
    /// Unknown inequality ids and fields are rejected here.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::parse(origin, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&read_to_string(path)?, path)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("suite configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(CliError::Config("tolerance must be nonnegative".into()));
        }
        for e in &self.inequalities {
            if e.p.values().is_empty() {
                return Err(CliError::Config(format!("{}: empty p list", e.id)));
            }
        }
        let c = &self.corpus;
        let sources = c.spec.is_some() as u8 + c.inline.is_some() as u8 + c.dir.is_some() as u8;
        if sources > 1 {
            return Err(CliError::Config(
                "corpus takes at most one of spec, inline and dir".into(),
            ));
        }
        Ok(())
    }

    /// Makes relative paths relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.corpus.spec.as_mut() {
            fix(p);
        }
        if let Some(p) = self.corpus.dir.as_mut() {
            fix(p);
        }
        self.corpus.files.iter_mut().for_each(fix);
        for e in &mut self.inequalities {
            if let Some(p) = e.phi.as_mut() {
                fix(p);
            }
        }
    }

    /// Loads or generates the corpus, with its seed when one applies.
    pub fn load_corpus(&self) -> Result<(Vec<LoadedItem>, Option<u64>)> {
        let c = &self.corpus;
        let (mut items, seed) = if let Some(dir) = &c.dir {
            let (manifest, items) = read_corpus(dir)?;
            (items, Some(manifest.spec.seed))
        } else {
            let spec = match (&c.spec, &c.inline) {
                (Some(path), _) => CorpusSpec::load(path)?,
                (None, Some(spec)) => spec.clone(),
                (None, None) if c.files.is_empty() => CorpusSpec::default(),
                (None, None) => CorpusSpec {
                    families: Vec::new(),
                    ..CorpusSpec::default()
                },
            };
            let seed = spec.seed;
            let items = if spec.families.is_empty() {
                Vec::new()
            } else {
                generate_corpus(&spec)?.into_iter().map(Ok).collect()
            };
            (items, (!spec.families.is_empty()).then_some(seed))
        };
        for path in &c.files {
            let id = path.file_stem().map_or_else(
                || path.display().to_string(),
                |s| s.to_string_lossy().into(),
            );
            items.push(
                read_grid(path)
                    .map(|function| crate::corpus::CorpusItem {
                        id: id.clone(),
                        family: "file".into(),
                        params: BTreeMap::new(),
                        function,
                    })
                    .map_err(|e| (id, e)),
            );
        }
        Ok((items, seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The checker rejected the input (mode mismatch, vanishing gradient...).
    Error,
    /// The function could not be loaded.
    InputError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub dim: usize,
    pub spacing: f64,
    pub extents: Vec<usize>,
}

impl GridInfo {
    fn of(f: &GridFunction) -> Self {
        Self {
            dim: f.dim(),
            spacing: f.spacing(),
            extents: f.extents().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: Real,
    pub lhs: Real,
    pub rhs: Real,
}

/// One (function, inequality, p) cell of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub function_id: String,
    pub inequality_id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub p: Real,
    pub params: BTreeMap<String, Real>,
    pub constant_used: Real,
    pub worst_ratio: Real,
    pub worst_location: Real,
    pub pass: bool,
    pub tolerance: Real,
    pub constant_mode: String,
    pub gradient_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRecord>,
}

/// Run-wide context copied into every record.
#[derive(Debug, Clone)]
pub struct RecordContext<'a> {
    pub function_id: &'a str,
    pub grid: Option<GridInfo>,
    pub seed: Option<u64>,
    pub gradient_mode: GradientMode,
    pub constant_mode: ConstantMode,
    pub keep_trace: bool,
}

impl ReportRecord {
    pub fn from_report(r: &CheckReport, p: f64, ctx: &RecordContext) -> Self {
        Self {
            function_id: ctx.function_id.into(),
            inequality_id: r.inequality_id.as_str().into(),
            status: if r.pass { Status::Pass } else { Status::Fail },
            reason: None,
            p: Real(p),
            params: r
                .params
                .iter()
                .map(|(k, v)| (k.clone(), Real(*v)))
                .collect(),
            constant_used: Real(r.constant_used),
            worst_ratio: Real(r.worst_ratio),
            worst_location: Real(r.worst_location),
            pass: r.pass,
            tolerance: Real(r.tolerance),
            constant_mode: ctx.constant_mode.as_str().into(),
            gradient_mode: ctx.gradient_mode.as_str().into(),
            grid: ctx.grid.clone(),
            seed: ctx.seed,
            flags: r.flags.clone(),
            trace: if ctx.keep_trace {
                r.trace
                    .iter()
                    .map(|tp| TraceRecord {
                        t: Real(tp.t),
                        lhs: Real(tp.lhs),
                        rhs: Real(tp.rhs),
                    })
                    .collect()
            } else {
                Vec::new()
            },
        }
    }

    pub fn failed(
        id: InequalityId,
        p: f64,
        status: Status,
        reason: String,
        tolerance: f64,
        ctx: &RecordContext,
    ) -> Self {
        Self {
            function_id: ctx.function_id.into(),
            inequality_id: id.as_str().into(),
            status,
            reason: Some(reason),
            p: Real(p),
            params: BTreeMap::new(),
            constant_used: Real(f64::NAN),
            worst_ratio: Real(f64::NAN),
            worst_location: Real(f64::NAN),
            pass: false,
            tolerance: Real(tolerance),
            constant_mode: ctx.constant_mode.as_str().into(),
            gradient_mode: ctx.gradient_mode.as_str().into(),
            grid: ctx.grid.clone(),
            seed: ctx.seed,
            flags: Vec::new(),
            trace: Vec::new(),
        }
    }
}

/// Best constant per (inequality, p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub inequality_id: String,
    pub p: Real,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    /// Largest `worst_ratio` over the checked functions.
    pub best_constant: Real,
    /// The constant the statement asserts, when it is the same for every row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_constant: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub reports: Vec<ReportRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SuiteResult {
    /// 0 when every row passes, 1 when a check fails or errors, 2 when only
    /// inputs failed to load.
    pub fn exit_code(&self) -> i32 {
        let st = |s| self.reports.iter().any(|r| r.status == s);
        if st(Status::Fail) || st(Status::Error) {
            1
        } else if st(Status::InputError) {
            2
        } else {
            0
        }
    }
}

struct Job<'a> {
    entry: &'a InequalityEntry,
    phi: Option<&'a ProfileHandle>,
    p: f64,
    item: Option<&'a LoadedItem>,
}

fn params_for(cfg: &SuiteConfig, e: &InequalityEntry, p: f64, dim: usize) -> InequalityParams {
    let d = InequalityParams::default();
    InequalityParams {
        p,
        n: e.n.unwrap_or(dim),
        constant_mode: cfg.constant_mode,
        tolerance: e.tolerance.unwrap_or(cfg.tolerance),
        points_per_decade: cfg.points_per_decade,
        derivative_factor: e.derivative_factor,
        derivative_form: if e.pointwise {
            DerivativeForm::Pointwise
        } else {
            DerivativeForm::Integrated
        },
        gradient_mode: cfg.gradient_mode,
        nash_constants: e.nash_constants.map(|[a, b]| (a, b)),
        chain_exponent: e.chain_exponent.unwrap_or(d.chain_exponent),
        lattice_points: e.lattice_points.unwrap_or(d.lattice_points),
        lattice_max: e.lattice_max.unwrap_or(d.lattice_max),
    }
}

fn run_job(cfg: &SuiteConfig, job: &Job, seed: Option<u64>) -> ReportRecord {
    let e = job.entry;
    let tol = e.tolerance.unwrap_or(cfg.tolerance);
    let mut ctx = RecordContext {
        function_id: "-",
        grid: None,
        seed: None,
        gradient_mode: cfg.gradient_mode,
        constant_mode: cfg.constant_mode,
        keep_trace: cfg.detail,
    };
    let function = match job.item {
        None => None,
        Some(Ok(item)) => {
            ctx.function_id = &item.id;
            ctx.grid = Some(GridInfo::of(&item.function));
            ctx.seed = seed;
            Some(&item.function)
        }
        Some(Err((id, err))) => {
            ctx.function_id = id;
            return ReportRecord::failed(
                e.id,
                job.p,
                Status::InputError,
                err.to_string(),
                tol,
                &ctx,
            );
        }
    };
    let dim = function.map_or(e.n.unwrap_or(1), |f| f.dim());
    let params = params_for(cfg, e, job.p, dim);
    // scalar sweeps ignore the function; any valid grid will do
    let placeholder;
    let f = match function {
        Some(f) => f,
        None => {
            placeholder = GridFunction::zeros(
                rearr_core::GridGeometry::new(1.0, vec![3]).expect("3 cells is a valid grid"),
            );
            &placeholder
        }
    };
    match run_check(e.id, f, job.phi, &params) {
        Ok(r) => ReportRecord::from_report(&r, job.p, &ctx),
        Err(err) => ReportRecord::failed(e.id, job.p, Status::Error, err.to_string(), tol, &ctx),
    }
}

fn summarize(reports: &[ReportRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for r in reports {
        let row = match rows
            .iter_mut()
            .find(|s| s.inequality_id == r.inequality_id && s.p == r.p)
        {
            Some(row) => row,
            None => {
                rows.push(SummaryRow {
                    inequality_id: r.inequality_id.clone(),
                    p: r.p,
                    checked: 0,
                    passed: 0,
                    failed: 0,
                    errors: 0,
                    best_constant: Real(f64::NAN),
                    reference_constant: None,
                });
                rows.last_mut().expect("just pushed")
            }
        };
        match r.status {
            Status::Pass | Status::Fail => {
                row.checked += 1;
                if r.pass {
                    row.passed += 1;
                } else {
                    row.failed += 1;
                }
                let w = r.worst_ratio.0;
                if row.best_constant.0.is_nan() || w > row.best_constant.0 {
                    row.best_constant = Real(w);
                }
                let c = if r.constant_mode == ConstantMode::Fitted.as_str() {
                    r.params.get("reference_constant").copied()
                } else {
                    Some(r.constant_used)
                };
                row.reference_constant = match (row.checked, row.reference_constant, c) {
                    (1, _, c) => c,
                    (_, Some(a), Some(b)) if a == b => Some(a),
                    _ => None,
                };
            }
            Status::Error | Status::InputError => row.errors += 1,
        }
    }
    rows
}

/// Runs every (function, inequality, p) cell. Cells are evaluated in parallel
/// and reported sorted by inequality id, then function id; failures of single
/// cells become rows with a reason.
pub fn run_suite(
    cfg: &SuiteConfig,
    corpus: &[LoadedItem],
    seed: Option<u64>,
) -> Result<SuiteResult> {
    cfg.validate()?;
    let mut phis: Vec<Option<ProfileHandle>> = Vec::with_capacity(cfg.inequalities.len());
    for e in &cfg.inequalities {
        phis.push(match &e.phi {
            Some(path) => Some(read_profile(path)?.phi()?),
            None => None,
        });
    }
    let mut jobs = Vec::new();
    for (e, phi) in cfg.inequalities.iter().zip(&phis) {
        for p in e.p.values() {
            if e.id.needs_function() {
                for item in corpus {
                    jobs.push(Job {
                        entry: e,
                        phi: phi.as_ref(),
                        p,
                        item: Some(item),
                    });
                }
            } else {
                jobs.push(Job {
                    entry: e,
                    phi: phi.as_ref(),
                    p,
                    item: None,
                });
            }
        }
    }
    let mut reports: Vec<ReportRecord> = jobs.par_iter().map(|j| run_job(cfg, j, seed)).collect();
    // stable: p and config order survive within an (inequality, function) pair
    reports.sort_by(|a, b| {
        (a.inequality_id.as_str(), a.function_id.as_str())
            .cmp(&(b.inequality_id.as_str(), b.function_id.as_str()))
    });
    let summary = summarize(&reports);
    Ok(SuiteResult { reports, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = SuiteConfig::default();
        let back = SuiteConfig::parse(&cfg.to_toml(), Path::new("x")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_ids_rejected() {
        let text = "[[inequality]]\nid = \"sobolev_fractional\"\np = 2.0\n";
        let err = SuiteConfig::parse(text, Path::new("cfg.toml")).unwrap_err();
        assert!(err.to_string().contains("sobolev_fractional"), "{err}");
        let ok = "[[inequality]]\nid = \"nash\"\np = 2.0\n";
        assert!(SuiteConfig::parse(ok, Path::new("cfg.toml")).is_ok());
        let typo = "gradient_mod = \"metric_max\"\n";
        assert!(SuiteConfig::parse(typo, Path::new("cfg.toml")).is_err());
    }

    #[test]
    fn empty_inequality_list_is_vacuous() {
        let cfg = SuiteConfig {
            inequalities: Vec::new(),
            ..SuiteConfig::default()
        };
        let r = run_suite(&cfg, &[], None).unwrap();
        assert!(r.reports.is_empty() && r.summary.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn bad_items_become_rows() {
        let cfg = SuiteConfig {
            inequalities: vec![InequalityEntry::new(InequalityId::SPhiP, &[1.0])],
            ..SuiteConfig::default()
        };
        let corpus = vec![Err((
            "broken".to_string(),
            CliError::parse(Path::new("broken.json"), "truncated"),
        ))];
        let r = run_suite(&cfg, &corpus, None).unwrap();
        assert_eq!(r.reports.len(), 1);
        assert_eq!(r.reports[0].status, Status::InputError);
        assert_eq!(r.summary[0].errors, 1);
        assert_eq!(r.exit_code(), 2);
    }
}
