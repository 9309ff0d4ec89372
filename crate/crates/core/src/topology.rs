//! Network geometries, their hardware inventories and growth classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based host index, matching the numbering used in exchange tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HostId(usize);

impl HostId {
    /// Panics on index 0; host numbering starts at 1.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "host indices are 1-based");
        HostId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn checked(index: usize, n: usize) -> Result<Self> {
        if (1..=n).contains(&index) {
            Ok(HostId(index))
        } else {
            Err(Error::HostOutOfRange { index, n })
        }
    }
}

impl fmt::Display for HostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four topology/protocol combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TopologyKind {
    /// Fully connected, `N - 1` exchangers per host.
    #[serde(rename = "fcn-full")]
    FcnFull,
    /// Fully connected, one exchanger per host.
    #[serde(rename = "fcn1")]
    FcnSingle,
    /// Linear chain (bus), two exchangers per host.
    #[serde(rename = "lch")]
    Lch,
    /// Star with a center switch, one exchanger per host.
    #[serde(rename = "star")]
    Star,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] =
        [TopologyKind::FcnFull, TopologyKind::FcnSingle, TopologyKind::Lch, TopologyKind::Star];

    /// Short machine name, as accepted on the command line.
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::FcnFull => "fcn-full",
            TopologyKind::FcnSingle => "fcn1",
            TopologyKind::Lch => "lch",
            TopologyKind::Star => "star",
        }
    }

    /// Conventional label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            TopologyKind::FcnFull => "FCN_{N-1}",
            TopologyKind::FcnSingle => "FCN_1",
            TopologyKind::Lch => "LCH",
            TopologyKind::Star => "STAR",
        }
    }

    pub fn exchangers_per_host(self, n: usize) -> usize {
        match self {
            TopologyKind::FcnFull => n - 1,
            TopologyKind::FcnSingle | TopologyKind::Star => 1,
            TopologyKind::Lch => 2,
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "fcn-full" | "fcn-n-1" | "fcn" => Ok(TopologyKind::FcnFull),
            "fcn1" | "fcn-1" | "fcn-single" => Ok(TopologyKind::FcnSingle),
            "lch" | "chain" | "bus" => Ok(TopologyKind::Lch),
            "star" => Ok(TopologyKind::Star),
            other => Err(Error::parse(0, format!("unknown topology `{other}`"))),
        }
    }
}

/// Cost axis of the complexity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cable,
    Ke,
    Time,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Cable, Metric::Ke, Metric::Time];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComplexityClass {
    #[serde(rename = "O(1)")]
    Constant,
    #[serde(rename = "O(N)")]
    Linear,
    #[serde(rename = "O(N^2)")]
    Quadratic,
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexityClass::Constant => "O(1)",
            ComplexityClass::Linear => "O(N)",
            ComplexityClass::Quadratic => "O(N^2)",
        })
    }
}

/// Asymptotic growth of one cost metric for a topology kind.
pub fn complexity_class(kind: TopologyKind, metric: Metric) -> ComplexityClass {
    use ComplexityClass::*;
    match (kind, metric) {
        (TopologyKind::FcnFull, Metric::Cable) => Quadratic,
        (TopologyKind::FcnFull, Metric::Ke) => Quadratic,
        (TopologyKind::FcnFull, Metric::Time) => Constant,
        (TopologyKind::FcnSingle, Metric::Cable) => Quadratic,
        (TopologyKind::FcnSingle, Metric::Ke) => Linear,
        (TopologyKind::FcnSingle, Metric::Time) => Linear,
        (TopologyKind::Lch, Metric::Cable) => Linear,
        (TopologyKind::Lch, Metric::Ke) => Linear,
        (TopologyKind::Lch, Metric::Time) => Quadratic,
        (TopologyKind::Star, Metric::Cable) => Linear,
        (TopologyKind::Star, Metric::Ke) => Linear,
        (TopologyKind::Star, Metric::Time) => Linear,
    }
}

/// A sized network of one kind. Construct with [`NetworkTopology::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TopologyHeader", into = "TopologyHeader")]
pub struct NetworkTopology {
    kind: TopologyKind,
    n_hosts: usize,
    exchangers_per_host: usize,
    has_center_switch: bool,
}

/// Serialized form of [`NetworkTopology`]; derived fields are checked on read.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyHeader {
    kind: TopologyKind,
    n_hosts: usize,
    exchangers_per_host: usize,
    has_center_switch: bool,
}

impl TryFrom<TopologyHeader> for NetworkTopology {
    type Error = Error;

    fn try_from(h: TopologyHeader) -> Result<Self> {
        let t = NetworkTopology::new(h.kind, h.n_hosts)?;
        if t.exchangers_per_host != h.exchangers_per_host || t.has_center_switch != h.has_center_switch {
            return Err(Error::parse(
                0,
                format!("topology header for {} with {} hosts has inconsistent hardware fields", h.kind, h.n_hosts),
            ));
        }
        Ok(t)
    }
}

impl From<NetworkTopology> for TopologyHeader {
    fn from(t: NetworkTopology) -> Self {
        TopologyHeader {
            kind: t.kind,
            n_hosts: t.n_hosts,
            exchangers_per_host: t.exchangers_per_host,
            has_center_switch: t.has_center_switch,
        }
    }
}

impl NetworkTopology {
    pub fn new(kind: TopologyKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize { n, min: 2 });
        }
        Ok(NetworkTopology {
            kind,
            n_hosts: n,
            exchangers_per_host: kind.exchangers_per_host(n),
            has_center_switch: kind == TopologyKind::Star,
        })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n_hosts(&self) -> usize {
        self.n_hosts
    }

    pub fn exchangers_per_host(&self) -> usize {
        self.exchangers_per_host
    }

    pub fn has_center_switch(&self) -> bool {
        self.has_center_switch
    }

    pub fn hosts(&self) -> impl Iterator<Item = HostId> {
        (1..=self.n_hosts).map(HostId)
    }

    /// Same kind, one more host. Derived counts follow from the new size.
    pub fn add_host(&self) -> NetworkTopology {
        NetworkTopology::new(self.kind, self.n_hosts + 1).expect("growing a valid topology keeps it valid")
    }

    pub fn cost_profile(&self) -> CostProfile {
        let n = self.n_hosts;
        let (cable_count, exchanger_count) = match self.kind {
            TopologyKind::FcnFull => (n * (n - 1) / 2, n * (n - 1)),
            TopologyKind::FcnSingle => (n * (n - 1) / 2, n),
            // one cable segment between each pair of adjacent hosts
            TopologyKind::Lch => (n - 1, 2 * n),
            // one spoke per host into the center switch
            TopologyKind::Star => (n, n),
        };
        CostProfile {
            cable_count,
            exchanger_count,
            center_switch_count: usize::from(self.has_center_switch),
            class_cable: complexity_class(self.kind, Metric::Cable),
            class_ke: complexity_class(self.kind, Metric::Ke),
            class_time: complexity_class(self.kind, Metric::Time),
        }
    }
}

/// Hardware counts and growth classes for one sized topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostProfile {
    pub cable_count: usize,
    pub exchanger_count: usize,
    pub center_switch_count: usize,
    pub class_cable: ComplexityClass,
    pub class_ke: ComplexityClass,
    pub class_time: ComplexityClass,
}
