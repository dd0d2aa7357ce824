//! Agent-access benchmark: timed task requests through a PEP/PDP pair.
//!
//! Four retrieval tasks run against a small corporate-filings corpus:
//! keyword search and keyword count (bundled into one task group behind a
//! single policy check, since they share a corpus scan), company-name
//! listing, and officer lookup. The harness drives a fixed protocol —
//! every task group gets `runs × requests_per_run` requests, each request
//! individually intercepted, decided, and (on grant) executed — and
//! records two latencies per request: the policy check alone and the full
//! round trip.
//!
//! Timing is either measured (`WallClock`) or synthesized from fixed
//! per-group costs (`SimulatedDeterministic`), the latter making the whole
//! benchmark byte-reproducible for tests and pipelines.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decision::{command_for, DecisionPoint};
use crate::enforcement::{Intercepted, PepState};
use crate::model::{AccessRequest, Credential, EnterpriseNetwork, Role, UserId, UserIdentity};
use crate::policy::PolicyCondition;
use crate::trust::TrustConfig;

// ---------------------------------------------------------------------------
// Corpus and agent tasks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("keyword must not be empty")]
    EmptyKeyword,
    #[error("no filing for company `{0}`")]
    UnknownCompany(String),
}

/// Document store the agents read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    docs: BTreeMap<String, String>,
}

impl Corpus {
    /// The corpus committed with the crate: three company filings.
    pub fn builtin() -> Self {
        let mut docs = BTreeMap::new();
        docs.insert(
            "aster.txt".to_string(),
            include_str!("../fixtures/corpus/aster.txt").to_string(),
        );
        docs.insert(
            "bellweather.txt".to_string(),
            include_str!("../fixtures/corpus/bellweather.txt").to_string(),
        );
        docs.insert(
            "corvid.txt".to_string(),
            include_str!("../fixtures/corpus/corvid.txt").to_string(),
        );
        Self { docs }
    }

    /// Loads every `.txt` file in a directory, keyed by file name.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut docs = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("txt") {
                let name = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .unwrap_or_default()
                    .to_string();
                docs.insert(name, std::fs::read_to_string(&path)?);
            }
        }
        Ok(Self { docs })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc_names(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.docs.get(name).map(String::as_str)
    }
}

fn count_in(text: &str, needle_lower: &str) -> u64 {
    text.to_lowercase().matches(needle_lower).count() as u64
}

/// Documents containing `keyword` (case-insensitive), in name order.
pub fn keyword_search(corpus: &Corpus, keyword: &str) -> Result<Vec<String>, AgentError> {
    if keyword.is_empty() {
        return Err(AgentError::EmptyKeyword);
    }
    let needle = keyword.to_lowercase();
    Ok(corpus
        .docs
        .iter()
        .filter(|(_, text)| count_in(text, &needle) > 0)
        .map(|(name, _)| name.clone())
        .collect())
}

/// Total occurrences of `keyword` (case-insensitive, non-overlapping)
/// across the corpus.
pub fn keyword_count(corpus: &Corpus, keyword: &str) -> Result<u64, AgentError> {
    if keyword.is_empty() {
        return Err(AgentError::EmptyKeyword);
    }
    let needle = keyword.to_lowercase();
    Ok(corpus.docs.values().map(|text| count_in(text, &needle)).sum())
}

/// Registered company name of every filing (`Company:` header), sorted.
pub fn company_names(corpus: &Corpus) -> Vec<String> {
    let mut names: Vec<String> = corpus
        .docs
        .values()
        .filter_map(|text| {
            text.lines()
                .find_map(|line| line.strip_prefix("Company:").map(|n| n.trim().to_string()))
        })
        .collect();
    names.sort();
    names
}

/// Officer roster from the `Officers:` block of the named company's filing.
pub fn officers(corpus: &Corpus, company: &str) -> Result<Vec<String>, AgentError> {
    for text in corpus.docs.values() {
        let is_company = text.lines().any(|line| {
            line.strip_prefix("Company:").map(|n| n.trim() == company).unwrap_or(false)
        });
        if !is_company {
            continue;
        }
        let mut roster = Vec::new();
        let mut in_block = false;
        for line in text.lines() {
            if line.trim() == "Officers:" {
                in_block = true;
                continue;
            }
            if in_block {
                match line.strip_prefix("- ") {
                    Some(officer) => roster.push(officer.trim().to_string()),
                    None => break,
                }
            }
        }
        return Ok(roster);
    }
    Err(AgentError::UnknownCompany(company.to_string()))
}

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskGroup {
    /// Keyword search and keyword count, executed together behind one
    /// policy check.
    SearchAndCount,
    CompanyNames,
    Officers,
}

impl TaskGroup {
    pub const ALL: [TaskGroup; 3] =
        [TaskGroup::SearchAndCount, TaskGroup::CompanyNames, TaskGroup::Officers];

    pub fn name(&self) -> &'static str {
        match self {
            TaskGroup::SearchAndCount => "search_and_count",
            TaskGroup::CompanyNames => "company_names",
            TaskGroup::Officers => "officers",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimingMode {
    /// Measure with the process clock.
    WallClock,
    /// Synthesize from fixed per-group costs; byte-reproducible.
    SimulatedDeterministic,
}

/// Fixed costs used by [`TimingMode::SimulatedDeterministic`]:
/// `round_trip = 2 × hop + check + service(group)`.
pub const SIM_HOP_US: u64 = 25;
pub const SIM_CHECK_US: u64 = 40;

pub fn sim_service_us(group: TaskGroup) -> u64 {
    match group {
        TaskGroup::SearchAndCount => 120,
        TaskGroup::CompanyNames => 80,
        TaskGroup::Officers => 100,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub runs: u32,
    pub requests_per_run: u32,
    pub role: Role,
    pub timing: TimingMode,
    pub keyword: String,
    pub company: String,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            runs: 3,
            requests_per_run: 50,
            role: Role::Administrator,
            timing: TimingMode::SimulatedDeterministic,
            keyword: "ltd".into(),
            company: "Aster Logistics Ltd".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub task_group: TaskGroup,
    /// 1-based run number.
    pub run: u32,
    /// 1-based request number within the run.
    pub request: u32,
    pub policy_check_us: u64,
    pub round_trip_us: u64,
}

/// What the tasks actually returned, recorded once per benchmark so result
/// correctness can be asserted alongside the timings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskResults {
    pub search_hits: Vec<String>,
    pub keyword_occurrences: u64,
    pub company_names: Vec<String>,
    pub officer_roster: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub samples: Vec<Sample>,
    pub grants: u64,
    pub denials: u64,
    /// Times a granted request actually ran its task group.
    pub task_executions: u64,
    pub results: TaskResults,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("benchmark produced no samples; nothing to export")]
    Empty,
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
}

pub const CSV_HEADER: &str = "task_group,run,request,policy_check_us,round_trip_us";

impl BenchOutcome {
    /// Samples as CSV, header first, in protocol order.
    pub fn to_csv(&self) -> Result<String, BenchError> {
        if self.samples.is_empty() {
            return Err(BenchError::Empty);
        }
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.task_group.name(),
                s.run,
                s.request,
                s.policy_check_us,
                s.round_trip_us
            ));
        }
        Ok(out)
    }
}

/// One network, one enforcement point, one admin-only policy over the
/// corpus: the deployment the benchmark runs against.
struct Harness {
    pdp: DecisionPoint,
    pep: PepState,
    agent: UserId,
    credential: Credential,
    next_request: u64,
}

impl Harness {
    fn new() -> Self {
        let network = EnterpriseNetwork {
            network_id: "bench".into(),
            trust_threshold: 0.0,
            segments: vec!["bench-seg".into()],
            pep_ids: vec!["bench-pep".into()],
        };
        let mut pdp = DecisionPoint::new(network, TrustConfig::default());
        pdp.register_resource(crate::model::Resource {
            resource_id: "corpus".into(),
            segment_id: "bench-seg".into(),
            network_id: "bench".into(),
            shared: false,
        });
        pdp.store_mut()
            .create_policy(
                "corpus-read",
                PolicyCondition {
                    required_role: Some(Role::Administrator),
                    min_trust: None,
                    resource_scope: ["corpus".to_string()].into_iter().collect(),
                    valid_window: None,
                },
                0,
            )
            .expect("benchmark policy creates cleanly");
        let agent: UserId = "agent".into();
        let credential = pdp.register_user(agent.clone(), 0.5, 0);
        let pep = PepState::new("bench-pep".into(), "bench".into(), None, 0);
        Self { pdp, pep, agent, credential, next_request: 0 }
    }

    /// One protocol step: intercept, decide, and on grant run the task.
    /// Returns (policy check, round trip) in microseconds plus the grant
    /// flag; simulated timings overwrite the measured ones.
    fn step(
        &mut self,
        group: TaskGroup,
        config: &BenchConfig,
        corpus: &Corpus,
        results: &mut TaskResults,
    ) -> Result<(u64, u64, bool), BenchError> {
        self.next_request += 1;
        let at = self.next_request;
        let request = AccessRequest {
            request_id: self.next_request,
            user: UserIdentity {
                user_id: self.agent.clone(),
                role: config.role,
                credential: self.credential.clone(),
                session_id: None,
            },
            target: "corpus".into(),
            network_id: "bench".into(),
            issued_at: at,
        };

        let whole = Instant::now();
        let forwarded = matches!(self.pep.intercept(&request, at), Intercepted::Forwarded(_));
        debug_assert!(forwarded, "bench enforcement point has no capacity limit");

        let check = Instant::now();
        let evaluation = self.pdp.evaluate(&request, at);
        let measured_check = check.elapsed().as_micros() as u64;

        let granted = evaluation.decision.is_grant();
        if granted {
            match group {
                TaskGroup::SearchAndCount => {
                    results.search_hits = keyword_search(corpus, &config.keyword)?;
                    results.keyword_occurrences = keyword_count(corpus, &config.keyword)?;
                }
                TaskGroup::CompanyNames => {
                    results.company_names = company_names(corpus);
                }
                TaskGroup::Officers => {
                    results.officer_roster = officers(corpus, &config.company)?;
                }
            }
        }
        let command = command_for(&evaluation.decision, &self.agent, &request.target);
        self.pep.enforce(&command);
        let measured_round = whole.elapsed().as_micros() as u64;

        let (check_us, round_us) = match config.timing {
            TimingMode::WallClock => (measured_check.max(1), measured_round.max(1)),
            TimingMode::SimulatedDeterministic => {
                let check = SIM_CHECK_US;
                (check, 2 * SIM_HOP_US + check + sim_service_us(group))
            }
        };
        Ok((check_us, round_us, granted))
    }
}

/// Runs the full protocol: for every task group, `runs` independent runs
/// of `requests_per_run` requests each.
pub fn run_benchmark(config: &BenchConfig, corpus: &Corpus) -> Result<BenchOutcome, BenchError> {
    let mut harness = Harness::new();
    let mut outcome = BenchOutcome {
        samples: Vec::with_capacity(
            TaskGroup::ALL.len() * (config.runs as usize) * (config.requests_per_run as usize),
        ),
        grants: 0,
        denials: 0,
        task_executions: 0,
        results: TaskResults::default(),
    };
    for group in TaskGroup::ALL {
        for run in 1..=config.runs {
            for request in 1..=config.requests_per_run {
                let (policy_check_us, round_trip_us, granted) =
                    harness.step(group, config, corpus, &mut outcome.results)?;
                if granted {
                    outcome.grants += 1;
                    outcome.task_executions += 1;
                } else {
                    outcome.denials += 1;
                }
                outcome.samples.push(Sample {
                    task_group: group,
                    run,
                    request,
                    policy_check_us,
                    round_trip_us,
                });
            }
        }
    }
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// CSV summarization (used by reporting)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub task_group: String,
    pub samples: u64,
    pub policy_check_us: crate::model::DurationStats,
    pub round_trip_us: crate::model::DurationStats,
}

/// Parses benchmark CSV back into per-group latency statistics.
pub fn summarize_csv(text: &str) -> Result<Vec<GroupSummary>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, other)) => {
            return Err(BenchError::Csv {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`, found `{other}`"),
            })
        }
        None => return Err(BenchError::Empty),
    }
    let mut checks: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let mut rounds: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let mut any = false;
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(BenchError::Csv {
                line: i + 1,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<u64, BenchError> {
            s.parse().map_err(|_| BenchError::Csv {
                line: i + 1,
                message: format!("{what} `{s}` is not a number"),
            })
        };
        let check = parse(fields[3], "policy_check_us")?;
        let round = parse(fields[4], "round_trip_us")?;
        checks.entry(fields[0].to_string()).or_default().push(check);
        rounds.entry(fields[0].to_string()).or_default().push(round);
        any = true;
    }
    if !any {
        return Err(BenchError::Empty);
    }
    Ok(checks
        .into_iter()
        .map(|(group, check_samples)| {
            let round_samples = &rounds[&group];
            GroupSummary {
                task_group: group,
                samples: check_samples.len() as u64,
                policy_check_us: crate::model::DurationStats::from_samples(&check_samples),
                round_trip_us: crate::model::DurationStats::from_samples(round_samples),
            }
        })
        .collect())
}
