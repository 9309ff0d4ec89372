//! Discrete-event replay of schedules to build multi-bit keys.
//!
//! A `k`-bit key per pair takes `k` passes over the topology's schedule.
//! Time is counted in SBEP steps starting at 1. Failures are permanent and
//! take effect at the start of their step; exchanges that need a failed
//! component are skipped and never retried.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{FailureScenario, FailureState};
use crate::error::{Error, Result};
use crate::protocols::generate;
use crate::schedule::{Schedule, UnorderedPair};
use crate::topology::{HostId, NetworkTopology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TimedFailure {
    pub step_time: usize,
    pub scenario: FailureScenario,
}

impl fmt::Display for TimedFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.scenario, self.step_time)
    }
}

impl FromStr for TimedFailure {
    type Err = Error;

    /// `<scenario>@<step>`, e.g. `center@4` or `cable:2-3@1`.
    fn from_str(s: &str) -> Result<Self> {
        let (scenario, time) =
            s.rsplit_once('@').ok_or_else(|| Error::InvalidScenario(format!("`{s}` lacks `@<step>`")))?;
        let step_time = time.trim().parse().map_err(|_| Error::InvalidScenario(format!("bad step time in `{s}`")))?;
        Ok(TimedFailure { step_time, scenario: scenario.parse()? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    topology: NetworkTopology,
    key_bits: u32,
    failures: Vec<TimedFailure>,
}

impl SimConfig {
    /// Failures are sorted by step time; every time must be at least 1.
    pub fn new(topology: NetworkTopology, key_bits: u32, mut failures: Vec<TimedFailure>) -> Result<Self> {
        if key_bits == 0 {
            return Err(Error::InvalidConfig("key length must be at least one bit".into()));
        }
        if let Some(f) = failures.iter().find(|f| f.step_time == 0) {
            return Err(Error::InvalidConfig(format!("failure {f} scheduled before step 1")));
        }
        failures.sort_by_key(|f| f.step_time);
        Ok(SimConfig { topology, key_bits, failures })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn failures(&self) -> &[TimedFailure] {
        &self.failures
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub key_bits: u32,
    pub schedule_len: usize,
    pub steps_executed: usize,
    pub bits_per_pair: BTreeMap<UnorderedPair, u32>,
    /// Fraction of executed steps in which each host took part in an exchange.
    pub host_utilization: BTreeMap<HostId, f64>,
    pub lost_pairs: BTreeSet<UnorderedPair>,
    pub skipped_exchanges: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    // failures at a step apply before that step's exchanges
    Failure(usize),
    Step { pass: usize, offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: usize,
    kind: EventKind,
}

pub fn run(config: &SimConfig) -> Result<SimReport> {
    let schedule = generate(config.topology.kind(), config.topology.n_hosts())?;
    run_schedule(config, &schedule)
}

/// Replays `schedule` under `config`; the schedule must belong to the config's topology.
pub fn run_schedule(config: &SimConfig, schedule: &Schedule) -> Result<SimReport> {
    if schedule.topology() != &config.topology {
        return Err(Error::InvalidConfig("schedule was built for a different topology".into()));
    }
    let n = config.topology.n_hosts();
    let len = schedule.len();
    let passes = config.key_bits as usize;

    let mut state = FailureState::new(config.topology);
    for f in &config.failures {
        // surface invalid scenarios before any time passes
        crate::analysis::check_scenario(&config.topology, f.scenario)?;
    }

    let mut queue = BinaryHeap::new();
    for (i, f) in config.failures.iter().enumerate() {
        queue.push(Reverse(Event { time: f.step_time, kind: EventKind::Failure(i) }));
    }
    for pass in 0..passes {
        for offset in 0..len {
            queue.push(Reverse(Event { time: pass * len + offset + 1, kind: EventKind::Step { pass, offset } }));
        }
    }

    let mut bits: BTreeMap<UnorderedPair, u32> = UnorderedPair::all(n).map(|p| (p, 0)).collect();
    let mut active_steps: BTreeMap<HostId, usize> = config.topology.hosts().map(|h| (h, 0)).collect();
    let mut steps_executed = 0;
    let mut skipped_exchanges = 0;

    while let Some(Reverse(event)) = queue.pop() {
        match event.kind {
            EventKind::Failure(i) => state.fail(config.failures[i].scenario)?,
            EventKind::Step { offset, .. } => {
                steps_executed += 1;
                let mut active = BTreeSet::new();
                for ex in &schedule.steps()[offset].exchanges {
                    let pair = ex.pair();
                    if !state.supports(pair) {
                        skipped_exchanges += 1;
                        continue;
                    }
                    *bits.entry(pair).or_insert(0) += 1;
                    active.insert(ex.initiator);
                    active.insert(ex.responder);
                }
                for h in active {
                    *active_steps.entry(h).or_insert(0) += 1;
                }
            }
        }
    }

    let host_utilization = active_steps
        .into_iter()
        .map(|(h, active)| (h, if steps_executed == 0 { 0.0 } else { active as f64 / steps_executed as f64 }))
        .collect();
    let lost_pairs = bits.iter().filter(|&(_, &b)| b < config.key_bits).map(|(&p, _)| p).collect();

    Ok(SimReport {
        key_bits: config.key_bits,
        schedule_len: len,
        steps_executed,
        bits_per_pair: bits,
        host_utilization,
        lost_pairs,
        skipped_exchanges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilizationSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

pub fn utilization_profile(report: &SimReport) -> UtilizationSummary {
    let values: Vec<f64> = report.host_utilization.values().copied().collect();
    if values.is_empty() {
        return UtilizationSummary { min: 0.0, mean: 0.0, max: 0.0 };
    }
    UtilizationSummary {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Serialize)]
struct PairBits {
    pair: String,
    bits: u32,
}

impl SimReport {
    /// `pair,bits` rows, pairs written `a-b`.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<PairBits> =
            self.bits_per_pair.iter().map(|(p, &bits)| PairBits { pair: p.to_string(), bits }).collect();
        crate::analysis::to_csv(&rows)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            key_bits: u32,
            schedule_len: usize,
            steps_executed: usize,
            skipped_exchanges: usize,
            bits_per_pair: Vec<PairBits>,
            host_utilization: Vec<(usize, f64)>,
            lost_pairs: Vec<String>,
            utilization: &'a UtilizationSummary,
        }
        let utilization = utilization_profile(self);
        crate::analysis::to_json(&Summary {
            key_bits: self.key_bits,
            schedule_len: self.schedule_len,
            steps_executed: self.steps_executed,
            skipped_exchanges: self.skipped_exchanges,
            bits_per_pair: self.bits_per_pair.iter().map(|(p, &bits)| PairBits { pair: p.to_string(), bits }).collect(),
            host_utilization: self.host_utilization.iter().map(|(h, &u)| (h.index(), u)).collect(),
            lost_pairs: self.lost_pairs.iter().map(|p| p.to_string()).collect(),
            utilization: &utilization,
        })
    }
}
