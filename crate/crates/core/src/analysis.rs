//! Regression over star step counts, comparison tables and failure analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::{generate, sbep_formula, SbepCount};
use crate::schedule::UnorderedPair;
use crate::topology::{ComplexityClass, HostId, NetworkTopology, TopologyKind};

// ---------------------------------------------------------------------------
// Regression

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Ordinary least squares line through `points`, with `R^2 = 1 - SS_res / SS_tot`.
///
/// A constant response has `SS_tot = 0`; it is reported as `R^2 = 1` when
/// the residuals vanish as well.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<RegressionFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points"));
    }
    if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite input"));
    }
    let count = points.len() as f64;
    let mean_x = compensated_sum(points.iter().map(|p| p.0)) / count;
    let mean_y = compensated_sum(points.iter().map(|p| p.1)) / count;
    let sxx = compensated_sum(points.iter().map(|&(x, _)| (x - mean_x) * (x - mean_x)));
    let sxy = compensated_sum(points.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)));
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all x values are equal"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let ss_tot = compensated_sum(points.iter().map(|&(_, y)| (y - mean_y) * (y - mean_y)));
    let ss_res = compensated_sum(points.iter().map(|&(x, y)| {
        let r = y - (slope * x + intercept);
        r * r
    }));
    let r_squared = if ss_tot == 0.0 {
        if ss_res <= f64::EPSILON * count * mean_y.abs().max(1.0) {
            1.0
        } else {
            return Err(Error::DegenerateFit("constant response with non-zero residuals"));
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RegressionFit { slope, intercept, r_squared })
}

pub fn build_sbep_table(n_max: usize) -> Result<Vec<SbepCount>> {
    if n_max < 2 {
        return Err(Error::InvalidSize { n: n_max, min: 2 });
    }
    (2..=n_max).map(|n| Ok(SbepCount { n, steps: sbep_formula(n)? })).collect()
}

/// Fit of SBEP(N) against N over `2..=n_max`.
pub fn sbep_regression(n_max: usize) -> Result<RegressionFit> {
    let points: Vec<(f64, f64)> = build_sbep_table(n_max)?.iter().map(|c| (c.n as f64, c.steps as f64)).collect();
    fit_linear(&points)
}

// ---------------------------------------------------------------------------
// Failures

/// Identifies a cable: a star spoke or chain segment by index, or a
/// dedicated link of a fully connected network by its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CableId {
    /// Star: spoke of host `i`. Chain: segment between hosts `i` and `i + 1`.
    Index(usize),
    Link(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FailureScenario {
    Cable(CableId),
    /// A host's key exchanger. On a fully connected network with `N - 1`
    /// exchangers, `slot` names the peer the exchanger is wired to; on a
    /// chain slot 1 faces downstream and slot 2 upstream.
    KeyExchanger {
        host: usize,
        slot: usize,
    },
    CenterSwitch,
}

impl fmt::Display for FailureScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureScenario::Cable(CableId::Index(i)) => write!(f, "cable:{i}"),
            FailureScenario::Cable(CableId::Link(a, b)) => write!(f, "cable:{a}-{b}"),
            FailureScenario::KeyExchanger { host, slot } => write!(f, "ke:{host}:{slot}"),
            FailureScenario::CenterSwitch => f.write_str("center"),
        }
    }
}

impl FromStr for FailureScenario {
    type Err = Error;

    /// `center`, `cable:I`, `cable:I-J`, `ke:H` or `ke:H:S`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidScenario(format!("cannot parse `{s}`"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        if s.trim() == "center" {
            return Ok(FailureScenario::CenterSwitch);
        }
        if let Some(rest) = s.strip_prefix("cable:") {
            return match rest.split_once('-') {
                Some((a, b)) => Ok(FailureScenario::Cable(CableId::Link(num(a)?, num(b)?))),
                None => Ok(FailureScenario::Cable(CableId::Index(num(rest)?))),
            };
        }
        if let Some(rest) = s.strip_prefix("ke:") {
            return match rest.split_once(':') {
                Some((h, slot)) => Ok(FailureScenario::KeyExchanger { host: num(h)?, slot: num(slot)? }),
                None => Ok(FailureScenario::KeyExchanger { host: num(rest)?, slot: 1 }),
            };
        }
        Err(bad())
    }
}

/// Checks that `f` names a component that exists in `t`; normalises link order.
pub fn check_scenario(t: &NetworkTopology, f: FailureScenario) -> Result<FailureScenario> {
    let n = t.n_hosts();
    let host_ok = |h: usize| (1..=n).contains(&h);
    let invalid = || Error::InvalidScenario(format!("{f} does not exist in {} with {n} hosts", t.kind()));
    let f = match (t.kind(), f) {
        (TopologyKind::Star, FailureScenario::CenterSwitch) => f,
        (_, FailureScenario::CenterSwitch) => return Err(invalid()),
        (TopologyKind::Star, FailureScenario::Cable(CableId::Index(i))) if host_ok(i) => f,
        (TopologyKind::Lch, FailureScenario::Cable(CableId::Index(k))) if (1..n).contains(&k) => f,
        (TopologyKind::FcnFull | TopologyKind::FcnSingle, FailureScenario::Cable(CableId::Link(a, b)))
            if host_ok(a) && host_ok(b) && a != b =>
        {
            FailureScenario::Cable(CableId::Link(a.min(b), a.max(b)))
        }
        (TopologyKind::Star | TopologyKind::FcnSingle, FailureScenario::KeyExchanger { host, slot: 1 })
            if host_ok(host) =>
        {
            f
        }
        (TopologyKind::Lch, FailureScenario::KeyExchanger { host, slot: 1 | 2 }) if host_ok(host) => f,
        (TopologyKind::FcnFull, FailureScenario::KeyExchanger { host, slot })
            if host_ok(host) && host_ok(slot) && host != slot =>
        {
            f
        }
        _ => return Err(invalid()),
    };
    Ok(f)
}

/// Every single component of `t` that can fail.
pub fn all_components(t: &NetworkTopology) -> Vec<FailureScenario> {
    let n = t.n_hosts();
    let mut out = Vec::new();
    match t.kind() {
        TopologyKind::Star => {
            out.push(FailureScenario::CenterSwitch);
            out.extend((1..=n).map(|i| FailureScenario::Cable(CableId::Index(i))));
            out.extend((1..=n).map(|host| FailureScenario::KeyExchanger { host, slot: 1 }));
        }
        TopologyKind::Lch => {
            out.extend((1..n).map(|k| FailureScenario::Cable(CableId::Index(k))));
            out.extend((1..=n).flat_map(|host| [1, 2].map(|slot| FailureScenario::KeyExchanger { host, slot })));
        }
        TopologyKind::FcnFull | TopologyKind::FcnSingle => {
            out.extend(
                UnorderedPair::all(n).map(|p| FailureScenario::Cable(CableId::Link(p.lo().index(), p.hi().index()))),
            );
            if t.kind() == TopologyKind::FcnFull {
                out.extend((1..=n).flat_map(|host| {
                    (1..=n).filter(move |&s| s != host).map(move |slot| FailureScenario::KeyExchanger { host, slot })
                }));
            } else {
                out.extend((1..=n).map(|host| FailureScenario::KeyExchanger { host, slot: 1 }));
            }
        }
    }
    out
}

/// Set of failed components of one topology; answers whether a pair can
/// still exchange bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureState {
    topology: NetworkTopology,
    failed: BTreeSet<FailureScenario>,
}

impl FailureState {
    pub fn new(topology: NetworkTopology) -> Self {
        FailureState { topology, failed: BTreeSet::new() }
    }

    pub fn with(topology: NetworkTopology, failures: &[FailureScenario]) -> Result<Self> {
        let mut state = FailureState::new(topology);
        for &f in failures {
            state.fail(f)?;
        }
        Ok(state)
    }

    pub fn fail(&mut self, f: FailureScenario) -> Result<()> {
        let f = check_scenario(&self.topology, f)?;
        self.failed.insert(f);
        Ok(())
    }

    pub fn is_intact(&self) -> bool {
        self.failed.is_empty()
    }

    fn down(&self, f: FailureScenario) -> bool {
        self.failed.contains(&f)
    }

    fn exchanger_down(&self, host: usize, slot: usize) -> bool {
        self.down(FailureScenario::KeyExchanger { host, slot })
    }

    /// Whether `pair` can still exchange a bit directly.
    pub fn supports(&self, pair: UnorderedPair) -> bool {
        let (a, b) = (pair.lo().index(), pair.hi().index());
        match self.topology.kind() {
            TopologyKind::Star => {
                !self.down(FailureScenario::CenterSwitch)
                    && [a, b]
                        .iter()
                        .all(|&h| !self.down(FailureScenario::Cable(CableId::Index(h))) && !self.exchanger_down(h, 1))
            }
            TopologyKind::Lch => {
                (a..b).all(|k| !self.down(FailureScenario::Cable(CableId::Index(k))))
                    // a host loses reach only if both of its exchangers are gone
                    && [a, b].iter().all(|&h| !(self.exchanger_down(h, 1) && self.exchanger_down(h, 2)))
            }
            TopologyKind::FcnFull => {
                !self.down(FailureScenario::Cable(CableId::Link(a, b)))
                    && !self.exchanger_down(a, b)
                    && !self.exchanger_down(b, a)
            }
            TopologyKind::FcnSingle => {
                !self.down(FailureScenario::Cable(CableId::Link(a, b)))
                    && !self.exchanger_down(a, 1)
                    && !self.exchanger_down(b, 1)
            }
        }
    }

    /// Chain hosts that lost one of their two exchangers.
    pub fn degraded_hosts(&self) -> BTreeSet<HostId> {
        if self.topology.kind() != TopologyKind::Lch {
            return BTreeSet::new();
        }
        self.topology
            .hosts()
            .filter(|h| {
                let (down, up) = (self.exchanger_down(h.index(), 1), self.exchanger_down(h.index(), 2));
                down != up
            })
            .collect()
    }

    pub fn report(&self) -> ConnectivityReport {
        let n = self.topology.n_hosts();
        let reachable_pairs: BTreeSet<UnorderedPair> = UnorderedPair::all(n).filter(|&p| self.supports(p)).collect();

        // union-find over reachable pairs
        let mut parent: Vec<usize> = (0..=n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for p in &reachable_pairs {
            let (ra, rb) = (root(&mut parent, p.lo().index()), root(&mut parent, p.hi().index()));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, Vec<HostId>> = BTreeMap::new();
        for h in 1..=n {
            let r = root(&mut parent, h);
            groups.entry(r).or_default().push(HostId::new(h));
        }

        let touched: BTreeSet<HostId> = reachable_pairs.iter().flat_map(|p| [p.lo(), p.hi()]).collect();
        let isolated_hosts = self.topology.hosts().filter(|h| !touched.contains(h)).collect();
        let lost_pairs = UnorderedPair::all(n).filter(|p| !reachable_pairs.contains(p)).collect();

        ConnectivityReport {
            reachable_pairs,
            lost_pairs,
            isolated_hosts,
            components: groups.into_values().collect(),
            degraded_hosts: self.degraded_hosts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub reachable_pairs: BTreeSet<UnorderedPair>,
    pub lost_pairs: BTreeSet<UnorderedPair>,
    pub isolated_hosts: BTreeSet<HostId>,
    /// Connected components of the reachable-pair graph, ordered by smallest host.
    pub components: Vec<Vec<HostId>>,
    /// Hosts still reachable but running on reduced exchanger capacity.
    pub degraded_hosts: BTreeSet<HostId>,
}

pub fn apply_failure(t: &NetworkTopology, f: FailureScenario) -> Result<ConnectivityReport> {
    apply_failures(t, &[f])
}

pub fn apply_failures(t: &NetworkTopology, failures: &[FailureScenario]) -> Result<ConnectivityReport> {
    Ok(FailureState::with(*t, failures)?.report())
}

// ---------------------------------------------------------------------------
// Comparison

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub network: &'static str,
    pub kind: TopologyKind,
    pub n: usize,
    pub cables: usize,
    pub exchangers: usize,
    pub center_switches: usize,
    pub steps: usize,
    pub class_cable: ComplexityClass,
    pub class_ke: ComplexityClass,
    pub class_time: ComplexityClass,
    /// Most pairs any single component failure can cut off.
    pub worst_single_failure: usize,
    /// True if one component failure disconnects every pair.
    pub single_point_of_failure: bool,
}

pub fn compare_networks(n: usize) -> Result<Vec<ComparisonRow>> {
    TopologyKind::ALL
        .iter()
        .map(|&kind| {
            let t = NetworkTopology::new(kind, n)?;
            let cost = t.cost_profile();
            let total = n * (n - 1) / 2;
            let mut worst = 0;
            for f in all_components(&t) {
                worst = worst.max(apply_failure(&t, f)?.lost_pairs.len());
            }
            Ok(ComparisonRow {
                network: kind.label(),
                kind,
                n,
                cables: cost.cable_count,
                exchangers: cost.exchanger_count,
                center_switches: cost.center_switch_count,
                steps: generate(kind, n)?.len(),
                class_cable: cost.class_cable,
                class_ke: cost.class_ke,
                class_time: cost.class_time,
                worst_single_failure: worst,
                single_point_of_failure: worst == total,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Export

/// CSV with a header row and LF line endings.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Export(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Export(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
