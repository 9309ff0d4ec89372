//! Exhaustive minimum-step search and the matching lower bound.
//!
//! The search is iterative deepening on the step count. Steps are built one
//! at a time. Without loss of generality every step contains the smallest
//! pair not yet scheduled and is maximal among the pairs that remain, so each
//! step is drawn from the maximal compatible sets containing that pair. Two
//! sound counting bounds prune the tree: total remaining load against what
//! the remaining steps can carry, and each host's remaining degree against
//! its per-step capacity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::sbep_formula;
use crate::schedule::{PairExchange, Schedule};
use crate::topology::{HostId, NetworkTopology, TopologyKind};

/// Largest host counts the exhaustive search accepts by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_hosts: usize,
    pub max_hosts_chain: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_hosts: 8, max_hosts_chain: 6 }
    }
}

impl SearchLimits {
    fn ceiling(&self, kind: TopologyKind) -> usize {
        match kind {
            TopologyKind::Lch => self.max_hosts_chain,
            _ => self.max_hosts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub n: usize,
    pub constraint_model: TopologyKind,
    pub min_steps: usize,
    pub witness: Schedule,
}

/// Per-step feasibility rule of a topology, restated over pair indices.
#[derive(Clone, Copy)]
enum Model {
    /// One exchanger per host: steps are matchings.
    Matching,
    /// Chain: wire intervals must be interior-disjoint.
    Interval,
    /// Enough exchangers for every pair at once.
    Free,
}

struct Search {
    n: usize,
    model: Model,
    pairs: Vec<(usize, usize)>,
    /// `compatible[i]` has bit `j` set iff pairs `i` and `j` may share a step.
    compatible: Vec<u64>,
    steps: Vec<u64>,
}

impl Search {
    fn new(kind: TopologyKind, n: usize) -> Self {
        let model = match kind {
            TopologyKind::FcnSingle | TopologyKind::Star => Model::Matching,
            TopologyKind::Lch => Model::Interval,
            TopologyKind::FcnFull => Model::Free,
        };
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        let compatible = pairs
            .iter()
            .map(|&p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|&(_, &q)| p != q && Self::fits(model, p, q))
                    .fold(0u64, |m, (j, _)| m | 1 << j)
            })
            .collect();
        Search { n, model, pairs, compatible, steps: Vec::new() }
    }

    fn fits(model: Model, (a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
        match model {
            Model::Matching => a != c && a != d && b != c && b != d,
            Model::Interval => a.max(c) >= b.min(d),
            Model::Free => true,
        }
    }

    /// False if `remaining` provably cannot be covered in `steps_left` steps.
    fn feasible(&self, remaining: u64, steps_left: usize) -> bool {
        if remaining == 0 {
            return true;
        }
        if steps_left == 0 {
            return false;
        }
        let n = self.n;
        let mut degree = vec![0usize; n + 1];
        let mut load = 0usize;
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            if remaining >> i & 1 == 1 {
                degree[a] += 1;
                degree[b] += 1;
                load += match self.model {
                    Model::Interval => b - a,
                    _ => 1,
                };
            }
        }
        match self.model {
            Model::Matching => load <= steps_left * (n / 2) && degree.iter().all(|&d| d <= steps_left),
            Model::Interval => {
                load <= steps_left * (n - 1)
                    && degree[1] <= steps_left
                    && degree[n] <= steps_left
                    && degree.iter().all(|&d| d <= 2 * steps_left)
            }
            Model::Free => true,
        }
    }

    /// Enumerates maximal compatible subsets of `remaining` that contain `seed`.
    fn maximal_steps(&self, seed: usize, remaining: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let candidates = remaining & self.compatible[seed];
        self.extend(1 << seed, candidates, remaining, seed + 1, &mut out);
        out
    }

    fn extend(&self, chosen: u64, candidates: u64, remaining: u64, from: usize, out: &mut Vec<u64>) {
        let open = candidates & !((1u64 << from) - 1);
        if open == 0 {
            // maximal iff no remaining pair outside `chosen` is compatible with all of it
            let blocked = (0..self.pairs.len())
                .filter(|&i| remaining >> i & 1 == 1 && chosen >> i & 1 == 0)
                .all(|i| chosen & !self.compatible[i] != 0);
            if blocked {
                out.push(chosen);
            }
            return;
        }
        let next = open.trailing_zeros() as usize;
        self.extend(chosen | 1 << next, candidates & self.compatible[next], remaining, next + 1, out);
        // leaving `next` out can only stay maximal if a later candidate conflicts with it
        let rest = open & !(1u64 << next);
        if rest & !self.compatible[next] != 0 {
            self.extend(chosen, candidates & !(1 << next), remaining, next + 1, out);
        }
    }

    fn cover(&mut self, remaining: u64, steps_left: usize) -> bool {
        if remaining == 0 {
            return true;
        }
        if !self.feasible(remaining, steps_left) {
            return false;
        }
        let seed = remaining.trailing_zeros() as usize;
        for step in self.maximal_steps(seed, remaining) {
            self.steps.push(step);
            if self.cover(remaining & !step, steps_left - 1) {
                return true;
            }
            self.steps.pop();
        }
        false
    }
}

/// Exact minimum number of steps covering all pairs under `kind`'s per-step rules.
pub fn min_steps_bruteforce(kind: TopologyKind, n: usize) -> Result<OracleResult> {
    min_steps_bruteforce_with(kind, n, SearchLimits::default())
}

pub fn min_steps_bruteforce_with(kind: TopologyKind, n: usize, limits: SearchLimits) -> Result<OracleResult> {
    let topology = NetworkTopology::new(kind, n)?;
    let ceiling = limits.ceiling(kind).min(11);
    if n > ceiling {
        return Err(Error::SearchTooLarge { kind, n, ceiling });
    }
    let mut search = Search::new(kind, n);
    let all = if search.pairs.len() == 64 { u64::MAX } else { (1u64 << search.pairs.len()) - 1 };
    let mut k = 1;
    while !search.cover(all, k) {
        search.steps.clear();
        k += 1;
    }
    let steps = search
        .steps
        .iter()
        .map(|&mask| {
            search
                .pairs
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &(a, b))| PairExchange::new(HostId::new(a), HostId::new(b)).expect("a < b"))
                .collect()
        })
        .collect();
    Ok(OracleResult { n, constraint_model: kind, min_steps: k, witness: Schedule::new(topology, steps) })
}

/// Minimum number of matchings covering the complete graph on `n` hosts.
pub fn chromatic_index_lower_bound(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    Ok(if n.is_multiple_of(2) { n - 1 } else { n })
}

/// Lower and upper bounds on chain schedule length, for sizes beyond the search.
///
/// Every step carries at most `N - 1` wire segments and all pairs together
/// need `C(N+1, 3)` of them; one pair per step is always possible.
pub fn chain_bounds(n: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    let total_length = (n + 1) * n * (n - 1) / 6;
    Ok((total_length.div_ceil(n - 1), n * (n - 1) / 2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverheadRow {
    pub n: usize,
    pub sbep: usize,
    pub lower_bound: usize,
    pub overhead: usize,
}

/// Star protocol step count against the matching lower bound for each `n`.
pub fn overhead_table(range: std::ops::RangeInclusive<usize>) -> Result<Vec<OverheadRow>> {
    if range.is_empty() || *range.start() < 2 || *range.end() > 50 {
        return Err(Error::InvalidRange(format!("{}..={} must lie within 2..=50", range.start(), range.end())));
    }
    range
        .map(|n| {
            let sbep = sbep_formula(n)?;
            let lower_bound = chromatic_index_lower_bound(n)?;
            let overhead = sbep.checked_sub(lower_bound).ok_or(Error::ModelInconsistency {
                n,
                raw: sbep,
                formula: lower_bound,
            })?;
            Ok(OverheadRow { n, sbep, lower_bound, overhead })
        })
        .collect()
}
