use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Proposition, Scenario, ScenarioError};
use crate::context::ContextFamily;
use crate::flow::{check_compatibility, check_covariance, check_flow_identity, schrodinger_evolve_state, CheckReport, UnitaryFlow};
use crate::format::g12;
use crate::measure::{measure_axioms_check, projection_fapm, sample_subobject_pairs, section_from_state, CPGlobalSection};
use crate::spectrum::{find_global_section_with_budget, SearchOutcome};
use crate::subobject::{outer_daseinisation, ClopenSubobject};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Contexts,
    Daseinise,
    Evolve,
    Check,
    Ks,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Contexts => "contexts",
            Self::Daseinise => "daseinise",
            Self::Evolve => "evolve",
            Self::Check => "check",
            Self::Ks => "ks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckKind {
    #[default]
    Compat,
    Covariance,
    Axioms,
    FlowIdentity,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Compat => "compat",
            Self::Covariance => "covariance",
            Self::Axioms => "axioms",
            Self::FlowIdentity => "flow-identity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub tol: f64,
    pub budget: u64,
    pub check: CheckKind,
    pub proposition: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            budget: crate::spectrum::DEFAULT_SEARCH_BUDGET,
            check: CheckKind::default(),
            proposition: None,
        }
    }
}

/// Exit status contract of the command line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Check passed or witness found.
    Pass,
    /// Identity violated or no global section.
    Failure,
    InputError,
    /// Search budget ran out.
    Exhausted,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Failure => 1,
            Self::InputError => 2,
            Self::Exhausted => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the scenario text.
    pub input_digest: String,
    pub outputs: Vec<String>,
    pub discrepancies: BTreeMap<String, f64>,
    pub status: Status,
    pub exit_code: i32,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<OutputFile>,
    pub status: Status,
    pub report: RunReport,
}

#[derive(Default)]
struct Outcome {
    stdout: String,
    files: Vec<OutputFile>,
    discrepancies: BTreeMap<String, f64>,
    status: Option<Status>,
}

impl Outcome {
    fn file(&mut self, name: &str, contents: String) {
        self.files.push(OutputFile { name: name.into(), contents });
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.stdout.push_str(text.as_ref());
        self.stdout.push('\n');
    }
}

/// Parse `scenario_text` and run `command` on it.
pub fn run(command: Command, scenario_text: &str, opts: &RunOptions) -> Result<CommandOutput, ScenarioError> {
    let start = Instant::now();
    let digest: String = Sha256::digest(scenario_text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let scenario = Scenario::from_json(scenario_text)?;
    let family = Arc::new(scenario.family()?);
    let out = match command {
        Command::Contexts => contexts(&family),
        Command::Daseinise => daseinise(&scenario, &family, opts)?,
        Command::Evolve => evolve(&scenario, &family, opts)?,
        Command::Check => match opts.check {
            CheckKind::Compat | CheckKind::Covariance => picture_check(&scenario, &family, opts)?,
            CheckKind::Axioms => axioms(&scenario, &family, opts)?,
            CheckKind::FlowIdentity => flow_identity(&scenario, &family, opts)?,
        },
        Command::Ks => ks(&family, opts),
    };
    let status = out.status.unwrap_or(Status::Pass);
    let report = RunReport {
        command: match command {
            Command::Check => format!("check {}", opts.check.name()),
            c => c.name().to_string(),
        },
        input_digest: digest,
        outputs: out.files.iter().map(|f| f.name.clone()).collect(),
        discrepancies: out.discrepancies,
        status,
        exit_code: status.code(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(CommandOutput { stdout: out.stdout, files: out.files, status, report })
}

fn ranks(family: &ContextFamily, v: usize) -> String {
    family.context(v).ranks().iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn contexts(family: &ContextFamily) -> Outcome {
    let mut out = Outcome::default();
    out.line(format!("family: {} contexts, dimension {}", family.len(), family.dim()));
    let mut csv = String::from("context,id,ranks,below\n");
    for v in 0..family.len() {
        let below: Vec<String> = family.below(v).filter(|&a| a != v).map(|a| a.to_string()).collect();
        out.line(format!("context {v} id={} ranks=[{}]", family.context(v).id().short(), ranks(family, v)));
        let _ = writeln!(csv, "{v},{},{},{}", family.context(v).id().short(), ranks(family, v), below.join(" "));
    }
    let covering = family.covering_pairs();
    out.line(format!("order: {} strict inclusions, {} covering", family.strict_pairs().len(), covering.len()));
    for (a, b) in family.strict_pairs() {
        out.line(format!("  {a} <= {b}"));
    }

    let mut dot = String::from("digraph contexts {\n  rankdir=BT;\n");
    for v in 0..family.len() {
        let _ = writeln!(dot, "  c{v} [label=\"{v}: {} ({})\"];", ranks(family, v), family.context(v).id().short());
    }
    for (a, b) in covering {
        let _ = writeln!(dot, "  c{a} -> c{b};");
    }
    dot.push_str("}\n");
    out.file("contexts.csv", csv);
    out.file("hasse.dot", dot);
    out
}

fn describe(s: &ClopenSubobject) -> String {
    if s.is_top() {
        "top".into()
    } else if s.is_bottom() {
        "bottom".into()
    } else {
        let nonempty = s.components().iter().filter(|c| !c.is_empty()).count();
        format!("{nonempty} of {} components nonempty", s.components().len())
    }
}

fn daseinise(scenario: &Scenario, family: &Arc<ContextFamily>, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let mut out = Outcome::default();
    let mut csv = String::from("proposition,context,id,blocks,rank\n");
    for p in scenario.select_propositions(opts.proposition.as_deref())? {
        let s = outer_daseinisation(&p.projection, family)?;
        out.line(format!("{}: {}", p.name, describe(&s)));
        for v in 0..family.len() {
            let blocks: Vec<String> = s.component(v).iter().map(|b| b.to_string()).collect();
            let _ = writeln!(
                csv,
                "{},{v},{},{},{}",
                p.name,
                family.context(v).id().short(),
                blocks.join(" "),
                s.component_projection(v).rank()
            );
        }
    }
    out.file("daseinise.csv", csv);
    Ok(out)
}

fn flow_of(scenario: &Scenario) -> Result<UnitaryFlow, ScenarioError> {
    let h = scenario.hamiltonian.as_ref().ok_or(ScenarioError::MissingHamiltonian)?;
    Ok(UnitaryFlow::new(h.operator.clone()))
}

fn times_of(scenario: &Scenario) -> Result<&[f64], ScenarioError> {
    if scenario.times.is_empty() {
        return Err(ScenarioError::Field { path: "times".into(), message: "no times given".into() });
    }
    Ok(&scenario.times)
}

fn compat_reports<'a>(
    scenario: &'a Scenario,
    family: &Arc<ContextFamily>,
    opts: &RunOptions,
    covariance: bool,
) -> Result<Vec<(&'a Proposition, CheckReport, f64)>, ScenarioError> {
    let flow = flow_of(scenario)?;
    let rho0 = scenario.state.as_ref().ok_or(ScenarioError::MissingState)?;
    let times = times_of(scenario)?;
    let mut reports = Vec::new();
    for p in scenario.select_propositions(opts.proposition.as_deref())? {
        let s0 = outer_daseinisation(&p.projection, family)?;
        for &t in times {
            let report = if covariance {
                check_covariance(rho0, &s0, &flow, t)?
            } else {
                check_compatibility(rho0, &s0, &flow, t)?
            };
            // ρ_t(P_0) = ρ_0(P_t)
            let rho_t = schrodinger_evolve_state(&flow, t, rho0)?;
            let p_t = flow.evolve_projection(t, &p.projection)?;
            let oracle = (rho_t.expectation(p.projection.matrix()) - rho0.expectation(p_t.matrix())).abs();
            reports.push((p, report, oracle));
        }
    }
    Ok(reports)
}

fn evolve(scenario: &Scenario, family: &Arc<ContextFamily>, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let mut out = Outcome::default();
    let mut table = String::from("proposition,t,context,id,schrodinger,heisenberg\n");
    let mut minima = String::from("proposition,t,schrodinger_min,heisenberg_min\n");
    let mut gap: f64 = 0.0;
    for (p, r, _) in compat_reports(scenario, family, opts, false)? {
        for row in &r.rows {
            let _ = writeln!(table, "{},{},{},{},{},{}", p.name, g12(r.t), row.context, row.id, g12(row.lhs), g12(row.rhs));
        }
        let _ = writeln!(minima, "{},{},{},{}", p.name, g12(r.t), g12(r.lhs_min), g12(r.rhs_min));
        out.line(format!(
            "{} t={} schrodinger_min={} heisenberg_min={}",
            p.name,
            g12(r.t),
            g12(r.lhs_min),
            g12(r.rhs_min)
        ));
        gap = gap.max(r.minima_gap());
    }
    out.discrepancies.insert("minima_gap".into(), gap);
    out.file("evolve.csv", table);
    out.file("evolve_minima.csv", minima);
    Ok(out)
}

fn verdict(out: &mut Outcome, tol: f64) {
    let worst = out.discrepancies.values().copied().fold(0.0, f64::max);
    let pass = worst <= tol;
    out.line(format!("{} max discrepancy {} (tolerance {})", if pass { "PASS" } else { "FAIL" }, g12(worst), g12(tol)));
    out.status = Some(if pass { Status::Pass } else { Status::Failure });
}

fn picture_check(scenario: &Scenario, family: &Arc<ContextFamily>, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let covariance = opts.check == CheckKind::Covariance;
    let mut out = Outcome::default();
    let mut csv = String::from("proposition,t,context,id,lhs,rhs,diff\n");
    let (mut max, mut route, mut minima, mut oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (p, r, o) in compat_reports(scenario, family, opts, covariance)? {
        for row in &r.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                p.name,
                g12(r.t),
                row.context,
                row.id,
                g12(row.lhs),
                g12(row.rhs),
                g12(row.diff)
            );
        }
        max = max.max(r.max);
        route = route.max(r.state_route_discrepancy);
        minima = minima.max(r.minima_gap());
        oracle = oracle.max(o);
    }
    out.discrepancies.insert("per_context".into(), max);
    out.discrepancies.insert("state_route".into(), route);
    out.discrepancies.insert("minima_gap".into(), minima);
    out.discrepancies.insert("trace_oracle".into(), oracle);
    out.line(format!("check {}: {} contexts, {} times", opts.check.name(), family.len(), scenario.times.len()));
    verdict(&mut out, opts.tol);
    out.file(&format!("check_{}.csv", opts.check.name()), csv);
    Ok(out)
}

fn flow_identity(scenario: &Scenario, family: &Arc<ContextFamily>, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let flow = flow_of(scenario)?;
    let mut out = Outcome::default();
    let mut csv = String::from("proposition,t,contexts,mismatches\n");
    let mut mismatches = 0usize;
    for p in scenario.select_propositions(opts.proposition.as_deref())? {
        for &t in times_of(scenario)? {
            let r = check_flow_identity(&flow, t, &p.projection, family)?;
            mismatches += r.mismatches.len();
            let _ = writeln!(csv, "{},{},{},{}", p.name, g12(t), r.contexts, r.mismatches.len());
        }
    }
    out.discrepancies.insert("mismatched_components".into(), mismatches as f64);
    out.line(format!("check flow-identity: {mismatches} mismatched components"));
    verdict(&mut out, 0.0);
    out.file("check_flow-identity.csv", csv);
    Ok(out)
}

fn axioms(scenario: &Scenario, family: &Arc<ContextFamily>, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let rho = scenario.state.as_ref().ok_or(ScenarioError::MissingState)?;
    let clean = section_from_state(rho, family)?;
    let mut values = clean.values().to_vec();
    for (i, p) in scenario.perturb_section.iter().enumerate() {
        let slot = values.get_mut(p.context).and_then(|v| v.get_mut(p.block)).ok_or_else(|| ScenarioError::Field {
            path: format!("perturb_section[{i}]"),
            message: format!("no block {} in context {}", p.block, p.context),
        })?;
        *slot += p.delta;
    }
    let m = CPGlobalSection::unchecked(Arc::clone(family), values)?;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut pairs = sample_subobject_pairs(&mut rng, family, 20);
    let daseinised = scenario
        .propositions
        .iter()
        .map(|p| outer_daseinisation(&p.projection, family))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, s) in daseinised.iter().enumerate() {
        for t in &daseinised[i..] {
            pairs.push((s.clone(), t.clone()));
        }
    }
    let report = measure_axioms_check(&m, &pairs)?;

    let mut out = Outcome::default();
    out.discrepancies.insert("normalization".into(), report.normalization);
    out.discrepancies.insert("modularity".into(), report.modularity);
    out.discrepancies.insert("antitone".into(), report.antitone);
    out.discrepancies.insert("compatibility".into(), report.compatibility);
    let well_defined = match projection_fapm(&m) {
        Ok(_) => "well-defined".to_string(),
        Err(e) => e.to_string(),
    };
    out.line(format!("check axioms: {} subobject pairs, projection measure {well_defined}", report.pairs_checked));
    let mut csv = String::from("axiom,violation\n");
    for (k, v) in &out.discrepancies {
        let _ = writeln!(csv, "{k},{}", g12(*v));
    }
    verdict(&mut out, opts.tol);
    out.file("check_axioms.csv", csv);
    Ok(out)
}

fn ks(family: &Arc<ContextFamily>, opts: &RunOptions) -> Outcome {
    let report = find_global_section_with_budget(family, opts.budget);
    let mut out = Outcome::default();
    out.discrepancies.insert("nodes".into(), report.nodes as f64);
    match &report.outcome {
        SearchOutcome::Found(s) => {
            out.line(format!("FOUND nodes={}", report.nodes));
            for (v, b) in s.assignment().iter().enumerate() {
                out.line(format!("  context {v} id={} block={b}", family.context(v).id().short()));
            }
            out.status = Some(Status::Pass);
        }
        SearchOutcome::Absent => {
            out.line(format!("NO-SECTION nodes={}", report.nodes));
            out.status = Some(Status::Failure);
        }
        SearchOutcome::Exhausted => {
            out.line(format!("BUDGET-EXHAUSTED nodes={}", report.nodes));
            out.status = Some(Status::Exhausted);
        }
    }
    out.file("ks.txt", out.stdout.clone());
    out
}
