//! Schedule data model and hardware-constraint validation.
//!
//! A [`Schedule`] is an ordered list of SBEP steps. Each step is a set of
//! host pairs that exchange one secure bit at the same time. Whether a step
//! is feasible depends on the topology:
//!
//! * star and single-exchanger fully connected networks: every host has one
//!   exchanger, so each step must be a matching;
//! * fully connected with `N - 1` exchangers: any set of pairs fits;
//! * linear chain: an exchange between `i` and `j` occupies the wire between
//!   them, so two exchanges in one step must use interior-disjoint stretches
//!   of wire. They may meet at a shared host, which then uses its downstream
//!   and its upstream exchanger.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{HostId, NetworkTopology, TopologyKind};

/// Unordered host pair, stored low index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnorderedPair(HostId, HostId);

impl UnorderedPair {
    pub fn new(a: HostId, b: HostId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(UnorderedPair(a, b)),
            std::cmp::Ordering::Greater => Ok(UnorderedPair(b, a)),
            std::cmp::Ordering::Equal => Err(Error::SelfExchange(a.index())),
        }
    }

    pub fn lo(self) -> HostId {
        self.0
    }

    pub fn hi(self) -> HostId {
        self.1
    }

    pub fn contains(self, h: HostId) -> bool {
        self.0 == h || self.1 == h
    }

    /// All `N(N-1)/2` pairs of `1..=n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = UnorderedPair> {
        (1..=n).flat_map(move |a| (a + 1..=n).map(move |b| UnorderedPair(HostId::new(a), HostId::new(b))))
    }
}

impl fmt::Display for UnorderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// One secure bit exchange, written `initiator -> responder`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairExchange {
    pub initiator: HostId,
    pub responder: HostId,
}

impl PairExchange {
    pub fn new(initiator: HostId, responder: HostId) -> Result<Self> {
        if initiator == responder {
            return Err(Error::SelfExchange(initiator.index()));
        }
        Ok(PairExchange { initiator, responder })
    }

    /// Convenience constructor from raw 1-based indices. Panics on invalid input.
    pub fn of(initiator: usize, responder: usize) -> Self {
        PairExchange::new(HostId::new(initiator), HostId::new(responder)).expect("distinct hosts")
    }

    pub fn pair(&self) -> UnorderedPair {
        UnorderedPair::new(self.initiator, self.responder).expect("initiator != responder")
    }

    /// Closed wire interval `[min, max]` the exchange occupies on a chain.
    pub fn span(&self) -> (usize, usize) {
        let p = self.pair();
        (p.lo().index(), p.hi().index())
    }

    pub fn involves(&self, h: HostId) -> bool {
        self.initiator == h || self.responder == h
    }
}

impl fmt::Display for PairExchange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.initiator, self.responder)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SbepStep {
    /// 1-based position in the schedule.
    pub index: usize,
    pub exchanges: Vec<PairExchange>,
}

impl SbepStep {
    pub fn new(index: usize, exchanges: Vec<PairExchange>) -> Self {
        SbepStep { index, exchanges }
    }

    pub fn is_empty(&self) -> bool {
        self.exchanges.is_empty()
    }

    pub fn hosts(&self) -> impl Iterator<Item = HostId> + '_ {
        self.exchanges.iter().flat_map(|e| [e.initiator, e.responder])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    topology: NetworkTopology,
    steps: Vec<SbepStep>,
}

impl Schedule {
    /// Builds a schedule from step contents; step indices are assigned 1, 2, ...
    pub fn new(topology: NetworkTopology, steps: Vec<Vec<PairExchange>>) -> Self {
        let steps = steps.into_iter().enumerate().map(|(i, ex)| SbepStep::new(i + 1, ex)).collect();
        Schedule { topology, steps }
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn steps(&self) -> &[SbepStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn exchanges(&self) -> impl Iterator<Item = (&SbepStep, &PairExchange)> {
        self.steps.iter().flat_map(|s| s.exchanges.iter().map(move |e| (s, e)))
    }
}

/// What a host does during one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HostState {
    /// Host starts an exchange with `target`.
    Initiator(HostId),
    /// Host is the responder of an exchange started by another host.
    Utilized(HostId),
    Inactive,
}

impl HostState {
    pub fn is_active(self) -> bool {
        !matches!(self, HostState::Inactive)
    }
}

/// Per-host states of one step of a single-exchanger schedule.
pub fn host_states(step: &SbepStep, n: usize) -> Result<BTreeMap<HostId, HostState>> {
    let mut states: BTreeMap<HostId, HostState> = (1..=n).map(|i| (HostId::new(i), HostState::Inactive)).collect();
    for ex in &step.exchanges {
        for (host, state) in
            [(ex.initiator, HostState::Initiator(ex.responder)), (ex.responder, HostState::Utilized(ex.initiator))]
        {
            let slot = states.get_mut(&host).ok_or(Error::HostOutOfRange { index: host.index(), n })?;
            if slot.is_active() {
                return Err(Error::AmbiguousHostState { host: host.index() });
            }
            *slot = state;
        }
    }
    Ok(states)
}

/// Number of appearances of every pair. All pairs of the topology are listed,
/// including those that never appear.
pub fn pair_coverage(s: &Schedule) -> BTreeMap<UnorderedPair, usize> {
    let mut counts: BTreeMap<UnorderedPair, usize> = UnorderedPair::all(s.topology.n_hosts()).map(|p| (p, 0)).collect();
    for (_, ex) in s.exchanges() {
        *counts.entry(ex.pair()).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    HostOutOfRange {
        step: usize,
        host: usize,
    },
    CapacityExceeded {
        step: usize,
        host: HostId,
        used: usize,
        capacity: usize,
    },
    IntervalOverlap {
        step: usize,
        first: PairExchange,
        second: PairExchange,
    },
    /// A pair exchanged again after `first_step`; reported once per extra occurrence.
    DuplicatePair {
        step: usize,
        pair: UnorderedPair,
        first_step: usize,
    },
    MissingPair {
        pair: UnorderedPair,
    },
}

impl Violation {
    pub fn step(&self) -> Option<usize> {
        match *self {
            Violation::HostOutOfRange { step, .. }
            | Violation::CapacityExceeded { step, .. }
            | Violation::IntervalOverlap { step, .. }
            | Violation::DuplicatePair { step, .. } => Some(step),
            Violation::MissingPair { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::HostOutOfRange { step, host } => write!(f, "step {step}: host {host} does not exist"),
            Violation::CapacityExceeded { step, host, used, capacity } => {
                write!(f, "step {step}: host {host} in {used} exchanges, has {capacity} exchanger(s)")
            }
            Violation::IntervalOverlap { step, first, second } => {
                write!(
                    f,
                    "step {step}: ({},{}) and ({},{}) share wire",
                    first.initiator, first.responder, second.initiator, second.responder
                )
            }
            Violation::DuplicatePair { step, pair, first_step } => {
                write!(f, "step {step}: pair {pair} already exchanged in step {first_step}")
            }
            Violation::MissingPair { pair } => write!(f, "pair {pair} never exchanges"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks a single step against the topology's per-step hardware limits.
pub fn step_violations(topology: &NetworkTopology, step: &SbepStep) -> Vec<Violation> {
    let n = topology.n_hosts();
    let capacity = topology.exchangers_per_host();
    let mut out = Vec::new();

    let mut usage: BTreeMap<HostId, usize> = BTreeMap::new();
    for h in step.hosts() {
        if h.index() > n {
            out.push(Violation::HostOutOfRange { step: step.index, host: h.index() });
        } else {
            *usage.entry(h).or_insert(0) += 1;
        }
    }
    for (&host, &used) in &usage {
        if used > capacity {
            out.push(Violation::CapacityExceeded { step: step.index, host, used, capacity });
        }
    }

    if topology.kind() == TopologyKind::Lch {
        for (i, a) in step.exchanges.iter().enumerate() {
            for b in &step.exchanges[i + 1..] {
                let (a_lo, a_hi) = a.span();
                let (b_lo, b_hi) = b.span();
                if a_lo.max(b_lo) < a_hi.min(b_hi) {
                    out.push(Violation::IntervalOverlap { step: step.index, first: *a, second: *b });
                }
            }
        }
    }
    out
}

pub fn validate_schedule(s: &Schedule) -> ValidationReport {
    let mut violations = Vec::new();
    let mut first_seen: BTreeMap<UnorderedPair, usize> = BTreeMap::new();

    for step in s.steps() {
        violations.extend(step_violations(&s.topology, step));
        for ex in &step.exchanges {
            let pair = ex.pair();
            match first_seen.get(&pair) {
                Some(&first_step) => violations.push(Violation::DuplicatePair { step: step.index, pair, first_step }),
                None => {
                    first_seen.insert(pair, step.index);
                }
            }
        }
    }

    let seen: BTreeSet<_> = first_seen.keys().copied().collect();
    violations.extend(
        UnorderedPair::all(s.topology.n_hosts())
            .filter(|p| !seen.contains(p))
            .map(|pair| Violation::MissingPair { pair }),
    );

    ValidationReport { ok: violations.is_empty(), violations }
}
