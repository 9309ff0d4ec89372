//! Schedule generators for every topology, and the star step-count model.
//!
//! # Star protocol
//!
//! Hosts sit on a virtual ring `1, 2, ..., N, 1`. The protocol works through
//! neighbour distances `d = 1, 2, ..., floor(N/2)`; in round `d` every host
//! `i` exchanges with host `i + d` (wrapping from `N` to `1`).
//!
//! The pairs of one round form `gcd(N, d)` cycles of length `N / gcd(N, d)`.
//! A round is emitted as two alternating phases along those cycles, plus a
//! residual step holding the edges cut out of the cycles so the phases line
//! up. The pre-merge step count per round is 2 for `d = 1` with even `N`,
//! 1 for `d = N/2`, and 3 otherwise.
//!
//! Residual steps of different rounds are then combined pairwise when their
//! hosts are disjoint, until [`merge_budget`] merges have been made and the
//! total equals [`sbep_formula`]. Which edge a round cuts out is free, so a
//! small backtracking search picks the cuts that let residuals merge.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::schedule::{PairExchange, Schedule};
use crate::topology::{HostId, NetworkTopology, TopologyKind};

/// Number of SBEP steps the star protocol needs for `n` hosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SbepCount {
    pub n: usize,
    #[serde(rename = "sbep")]
    pub steps: usize,
}

fn require_hosts(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidSize { n, min })
    } else {
        Ok(())
    }
}

/// Closed-form star step count, piecewise in the parity of `n` and `n <= 8`.
pub fn sbep_formula(n: usize) -> Result<usize> {
    require_hosts(n, 2)?;
    let quarter = n.div_ceil(4);
    Ok(match (n <= 8, n.is_multiple_of(2)) {
        (true, true) => n + quarter - 2,
        (true, false) => n + quarter - 1,
        (false, true) => n + quarter - 1,
        (false, false) => n + quarter,
    })
}

/// Pre-merge step count of each distance round, as `(distance, steps)`.
pub fn raw_distance_steps(n: usize) -> Result<Vec<(usize, usize)>> {
    require_hosts(n, 2)?;
    Ok((1..=n / 2).map(|d| (d, round_shape(n, d).steps())).collect())
}

/// Residual merges needed to bring the raw round total down to [`sbep_formula`].
pub fn merge_budget(n: usize) -> Result<usize> {
    let raw: usize = raw_distance_steps(n)?.iter().map(|&(_, s)| s).sum();
    let formula = sbep_formula(n)?;
    raw.checked_sub(formula).ok_or(Error::ModelInconsistency { n, raw, formula })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RoundShape {
    /// `d = N/2`: the `N/2` antipodal pairs form one perfect matching.
    Antipodal,
    /// `d = 1`, even `N`: the ring alternates cleanly into two phases.
    TwoPhase,
    /// Two phases plus a residual step of `width` edges.
    WithResidual { width: usize },
}

impl RoundShape {
    fn steps(self) -> usize {
        match self {
            RoundShape::Antipodal => 1,
            RoundShape::TwoPhase => 2,
            RoundShape::WithResidual { .. } => 3,
        }
    }

    fn residual_width(self) -> Option<usize> {
        match self {
            RoundShape::WithResidual { width } => Some(width),
            _ => None,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn round_shape(n: usize, d: usize) -> RoundShape {
    if n.is_multiple_of(2) && d == n / 2 {
        return RoundShape::Antipodal;
    }
    if n.is_multiple_of(2) && d == 1 {
        return RoundShape::TwoPhase;
    }
    let cycles = gcd(n, d);
    let cycle_len = n / cycles;
    // odd cycles each need one edge cut; even cycles only need one cut overall
    let width = if cycle_len % 2 == 1 { cycles } else { 1 };
    RoundShape::WithResidual { width }
}

/// 1-based ring position `i`, wrapped into `1..=n`.
fn ring(n: usize, i: usize) -> usize {
    (i - 1) % n + 1
}

fn ring_back(n: usize, i: usize, back: usize) -> usize {
    (i - 1 + n - back % n) % n + 1
}

fn ex(a: usize, b: usize) -> PairExchange {
    PairExchange::new(HostId::new(a), HostId::new(b)).expect("distinct ring hosts")
}

fn sorted(mut step: Vec<PairExchange>) -> Vec<PairExchange> {
    step.sort_by_key(|e| (e.initiator, e.responder));
    step
}

/// The steps of one distance round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistancePlan {
    pub distance: usize,
    pub phase_steps: Vec<Vec<PairExchange>>,
    pub residual: Option<Vec<PairExchange>>,
}

impl DistancePlan {
    pub fn raw_steps(&self) -> usize {
        self.phase_steps.len() + usize::from(self.residual.is_some())
    }
}

fn default_residual_start(n: usize, width: usize) -> usize {
    n - width + 1
}

fn residual_edges(n: usize, d: usize, width: usize, start: usize) -> Vec<PairExchange> {
    (0..width).map(|t| ex(ring(n, start + t), ring(n, start + t + d))).collect()
}

/// Decomposes round `d`. For rounds with a residual step, the cut edges start
/// at initiator `residual_start` and run over consecutive initiators, one per
/// ring cycle; `residual_start` is ignored for rounds without a residual.
pub fn distance_plan(n: usize, d: usize, residual_start: usize) -> Result<DistancePlan> {
    require_hosts(n, 2)?;
    if d == 0 || d > n / 2 {
        return Err(Error::InvalidRange(format!("distance {d} outside 1..={} for {n} hosts", n / 2)));
    }
    let shape = round_shape(n, d);
    if shape == RoundShape::Antipodal {
        let step = (1..=n / 2).map(|i| ex(i, i + d)).collect();
        return Ok(DistancePlan { distance: d, phase_steps: vec![step], residual: None });
    }

    let residual = shape.residual_width().map(|w| residual_edges(n, d, w, ring(n, residual_start)));
    let cut: Vec<usize> = residual.iter().flatten().map(|e| e.initiator.index()).collect();

    let mut first = Vec::new();
    let mut second = Vec::new();
    for c in 1..=gcd(n, d) {
        let len = n / gcd(n, d);
        let hosts: Vec<usize> = (0..len).map(|k| ring(n, c + k * d)).collect();
        let edges: Vec<PairExchange> = (0..len).map(|k| ex(hosts[k], hosts[(k + 1) % len])).collect();
        // walk the path that remains after the cut, or the whole (even) cycle
        let offset = edges.iter().position(|e| cut.contains(&e.initiator.index())).map_or(0, |r| r + 1);
        let path: Vec<PairExchange> =
            (0..len).map(|k| edges[(offset + k) % len]).filter(|e| !cut.contains(&e.initiator.index())).collect();
        let (even, odd): (Vec<_>, Vec<_>) = path.iter().enumerate().partition(|(k, _)| k % 2 == 0);
        let even: Vec<PairExchange> = even.into_iter().map(|(_, e)| *e).collect();
        let odd: Vec<PairExchange> = odd.into_iter().map(|(_, e)| *e).collect();
        let min_init = |v: &[PairExchange]| v.iter().map(|e| e.initiator).min();
        // the lowest initiator of the cycle goes first
        if min_init(&odd) < min_init(&even) && !odd.is_empty() {
            first.extend(odd);
            second.extend(even);
        } else {
            first.extend(even);
            second.extend(odd);
        }
    }

    Ok(DistancePlan { distance: d, phase_steps: vec![sorted(first), sorted(second)], residual: residual.map(sorted) })
}

/// A fully resolved star construction: per-round plans plus residual merges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarPlan {
    pub n: usize,
    pub rounds: Vec<DistancePlan>,
    /// `(earlier distance, later distance)` pairs whose residual steps share one SBEP.
    pub merges: Vec<(usize, usize)>,
}

impl StarPlan {
    pub fn schedule(&self) -> Schedule {
        let topology = NetworkTopology::new(TopologyKind::Star, self.n).expect("plan built for n >= 2");
        let partner: BTreeMap<usize, usize> = self.merges.iter().copied().collect();
        let absorbed: Vec<usize> = self.merges.iter().map(|&(_, late)| late).collect();
        let by_distance: BTreeMap<usize, &DistancePlan> = self.rounds.iter().map(|r| (r.distance, r)).collect();

        let mut steps = Vec::new();
        for round in &self.rounds {
            steps.extend(round.phase_steps.iter().cloned());
            let Some(residual) = &round.residual else { continue };
            if absorbed.contains(&round.distance) {
                continue;
            }
            let mut step = residual.clone();
            if let Some(late) = partner.get(&round.distance) {
                step.extend(by_distance[late].residual.iter().flatten().copied());
            }
            steps.push(sorted(step));
        }
        Schedule::new(topology, steps)
    }
}

const MERGE_SEARCH_NODE_LIMIT: usize = 200_000;

struct MergeSearch {
    n: usize,
    /// Residual rounds, largest distance first, with residual widths.
    rounds: Vec<(usize, usize)>,
    starts: BTreeMap<usize, usize>,
    paired: Vec<bool>,
    merges: Vec<(usize, usize)>,
    nodes: usize,
    best: usize,
}

impl MergeSearch {
    fn hosts(&self, d: usize, width: usize, start: usize) -> Vec<usize> {
        residual_edges(self.n, d, width, start)
            .iter()
            .flat_map(|e| [e.initiator.index(), e.responder.index()])
            .collect()
    }

    /// Tries to make `left` more merges among rounds `i..`.
    fn search(&mut self, i: usize, left: usize) -> bool {
        self.nodes += 1;
        self.best = self.best.max(self.merges.len());
        if left == 0 {
            return true;
        }
        if self.nodes > MERGE_SEARCH_NODE_LIMIT {
            return false;
        }
        let Some(i) = (i..self.rounds.len()).find(|&k| !self.paired[k]) else { return false };
        let free = (i..self.rounds.len()).filter(|&k| !self.paired[k]).count();
        if free < 2 * left {
            return false;
        }

        let (late, late_width) = self.rounds[i];
        let late_hosts = self.hosts(late, late_width, self.starts[&late]);
        self.paired[i] = true;
        for j in i + 1..self.rounds.len() {
            if self.paired[j] {
                continue;
            }
            let (early, width) = self.rounds[j];
            let preferred = default_residual_start(self.n, width);
            let found = (0..self.n)
                .map(|back| ring_back(self.n, preferred, back))
                .find(|&s| self.hosts(early, width, s).iter().all(|h| !late_hosts.contains(h)));
            let Some(start) = found else { continue };

            let previous = self.starts.insert(early, start);
            self.paired[j] = true;
            self.merges.push((early, late));
            if self.search(i + 1, left - 1) {
                return true;
            }
            self.merges.pop();
            self.paired[j] = false;
            self.starts.insert(early, previous.expect("every residual round has a start"));
        }
        // leave this round unmerged
        let ok = self.search(i + 1, left);
        if !ok {
            self.paired[i] = false;
        }
        ok
    }
}

/// Resolves the star construction for `n` hosts.
pub fn star_plan(n: usize) -> Result<StarPlan> {
    let target = sbep_formula(n)?;
    let budget = merge_budget(n)?;

    let mut rounds: Vec<(usize, usize)> =
        (1..=n / 2).filter_map(|d| round_shape(n, d).residual_width().map(|w| (d, w))).collect();
    rounds.reverse();
    let starts = rounds.iter().map(|&(d, w)| (d, default_residual_start(n, w))).collect();
    let mut search =
        MergeSearch { n, paired: vec![false; rounds.len()], rounds, starts, merges: Vec::new(), nodes: 0, best: 0 };

    if !search.search(0, budget) {
        let raw: usize = raw_distance_steps(n)?.iter().map(|&(_, s)| s).sum();
        return Err(Error::ProtocolConstruction { n, achieved: raw - search.best, target });
    }

    let rounds = (1..=n / 2)
        .map(|d| distance_plan(n, d, search.starts.get(&d).copied().unwrap_or(1)))
        .collect::<Result<Vec<_>>>()?;
    let mut merges = search.merges;
    merges.sort();
    Ok(StarPlan { n, rounds, merges })
}

pub fn generate_star(n: usize) -> Result<Schedule> {
    Ok(star_plan(n)?.schedule())
}

/// One step holding every pair; each host has an exchanger per peer.
pub fn generate_fcn_full(n: usize) -> Result<Schedule> {
    let topology = NetworkTopology::new(TopologyKind::FcnFull, n)?;
    let step = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| ex(a, b))).collect();
    Ok(Schedule::new(topology, vec![step]))
}

/// Circle-method round robin: host 1 stays put, the others rotate. Odd `n`
/// get a phantom host whose partner sits the round out.
pub fn generate_fcn_single(n: usize) -> Result<Schedule> {
    let topology = NetworkTopology::new(TopologyKind::FcnSingle, n)?;
    let m = n + n % 2;
    let mut wheel: Vec<usize> = (2..=m).collect();
    let mut steps = Vec::with_capacity(m - 1);
    for _ in 0..m - 1 {
        let mut step = Vec::with_capacity(m / 2);
        let mut push = |a: usize, b: usize| {
            if a <= n && b <= n {
                step.push(ex(a.min(b), a.max(b)));
            }
        };
        push(1, wheel[0]);
        for k in 1..m / 2 {
            push(wheel[k], wheel[m - 1 - k]);
        }
        steps.push(sorted(step));
        wheel.rotate_right(1);
    }
    Ok(Schedule::new(topology, steps))
}

/// Greedy packing of wire intervals, longest first, lowest start on ties.
pub fn generate_lch(n: usize) -> Result<Schedule> {
    let topology = NetworkTopology::new(TopologyKind::Lch, n)?;
    let mut remaining: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    remaining.sort_by_key(|&(a, b)| (std::cmp::Reverse(b - a), a));

    let mut steps = Vec::new();
    while !remaining.is_empty() {
        // segment k joins hosts k and k+1
        let mut wire = vec![false; n];
        let mut step = Vec::new();
        remaining.retain(|&(a, b)| {
            if wire[a..b].iter().any(|&used| used) {
                return true;
            }
            wire[a..b].iter_mut().for_each(|w| *w = true);
            step.push(ex(a, b));
            false
        });
        steps.push(sorted(step));
    }
    Ok(Schedule::new(topology, steps))
}

pub fn generate(kind: TopologyKind, n: usize) -> Result<Schedule> {
    match kind {
        TopologyKind::FcnFull => generate_fcn_full(n),
        TopologyKind::FcnSingle => generate_fcn_single(n),
        TopologyKind::Lch => generate_lch(n),
        TopologyKind::Star => generate_star(n),
    }
}
