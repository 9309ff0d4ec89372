//! Schedule serialization.
//!
//! Two equivalent encodings:
//!
//! * text, one step per line: `step 1: (1,2) (3,4)`. The topology is not
//!   part of the text and must be supplied when parsing.
//! * JSON, a single document holding the topology header and the steps as
//!   arrays of `[initiator, responder]` pairs.
//!
//! Both encodings reproduce their input byte for byte when parsed and
//! written back.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{PairExchange, Schedule};
use crate::topology::{HostId, NetworkTopology};

pub fn to_text(s: &Schedule) -> String {
    let mut out = String::new();
    for step in s.steps() {
        write!(out, "step {}:", step.index).unwrap();
        for ex in &step.exchanges {
            write!(out, " ({},{})", ex.initiator, ex.responder).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_text(input: &str, topology: NetworkTopology) -> Result<Schedule> {
    let mut steps = Vec::new();
    for (lineno, line) in input.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if line.trim().is_empty() {
            continue;
        }
        let rest = line.trim().strip_prefix("step").ok_or_else(|| Error::parse(lineno, "expected `step <k>:`"))?;
        let (num, body) = rest.split_once(':').ok_or_else(|| Error::parse(lineno, "missing `:` after step number"))?;
        let k: usize =
            num.trim().parse().map_err(|_| Error::parse(lineno, format!("bad step number `{}`", num.trim())))?;
        if k != steps.len() + 1 {
            return Err(Error::parse(lineno, format!("expected step {}, found step {k}", steps.len() + 1)));
        }
        let mut exchanges = Vec::new();
        for token in body.split_whitespace() {
            exchanges.push(parse_pair(token, lineno)?);
        }
        steps.push(exchanges);
    }
    Ok(Schedule::new(topology, steps))
}

fn parse_pair(token: &str, line: usize) -> Result<PairExchange> {
    let inner = token
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::parse(line, format!("expected `(a,b)`, found `{token}`")))?;
    let (a, b) =
        inner.split_once(',').ok_or_else(|| Error::parse(line, format!("expected `(a,b)`, found `{token}`")))?;
    let host = |s: &str| -> Result<HostId> {
        match s.trim().parse::<usize>() {
            Ok(i) if i >= 1 => Ok(HostId::new(i)),
            _ => Err(Error::parse(line, format!("bad host index `{s}`"))),
        }
    };
    PairExchange::new(host(a)?, host(b)?).map_err(|e| Error::parse(line, e.to_string()))
}

/// Largest host index mentioned in a text schedule.
pub fn max_host_in_text(input: &str) -> Result<usize> {
    let mut max = 0;
    for (lineno, line) in input.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if let Some((_, body)) = line.split_once(':') {
            for token in body.split_whitespace() {
                let ex = parse_pair(token, lineno)?;
                max = max.max(ex.initiator.index()).max(ex.responder.index());
            }
        }
    }
    Ok(max)
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    topology: NetworkTopology,
    steps: Vec<Vec<[usize; 2]>>,
}

pub fn to_json(s: &Schedule) -> String {
    let doc = ScheduleDoc {
        topology: *s.topology(),
        steps: s
            .steps()
            .iter()
            .map(|st| st.exchanges.iter().map(|e| [e.initiator.index(), e.responder.index()]).collect())
            .collect(),
    };
    let mut out = serde_json::to_string(&doc).expect("schedule documents always serialize");
    out.push('\n');
    out
}

pub fn parse_json(input: &str) -> Result<Schedule> {
    let doc: ScheduleDoc = serde_json::from_str(input).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let mut steps = Vec::with_capacity(doc.steps.len());
    for raw in doc.steps {
        let mut exchanges = Vec::with_capacity(raw.len());
        for [a, b] in raw {
            if a == 0 || b == 0 {
                return Err(Error::parse(0, "host indices are 1-based"));
            }
            exchanges
                .push(PairExchange::new(HostId::new(a), HostId::new(b)).map_err(|e| Error::parse(0, e.to_string()))?);
        }
        steps.push(exchanges);
    }
    Ok(Schedule::new(doc.topology, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::generate;
    use crate::topology::TopologyKind;
    use proptest::prelude::*;

    const STAR5: &str = "step 1: (1,2) (3,4)\nstep 2: (2,3) (4,5)\nstep 3: (5,1)\nstep 4: (1,3) (2,4)\nstep 5: (3,5) (4,1)\nstep 6: (5,2)\n";

    fn star5() -> NetworkTopology {
        NetworkTopology::new(TopologyKind::Star, 5).unwrap()
    }

    #[test]
    fn text_round_trip_star5() {
        let s = parse_text(STAR5, star5()).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.steps()[4].exchanges, vec![PairExchange::of(3, 5), PairExchange::of(4, 1)]);
        assert_eq!(to_text(&s), STAR5);
        assert_eq!(max_host_in_text(STAR5).unwrap(), 5);
    }

    #[test]
    fn empty_step_round_trips() {
        let text = "step 1: (1,2)\nstep 2:\n";
        let s = parse_text(text, NetworkTopology::new(TopologyKind::Star, 2).unwrap()).unwrap();
        assert!(s.steps()[1].is_empty());
        assert_eq!(to_text(&s), text);
    }

    #[test]
    fn text_parse_errors() {
        let t = star5();
        assert!(matches!(parse_text("step 2: (1,2)\n", t), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_text("step 1: (1,2)\nstep 2: (3,3)\n", t), Err(Error::Parse { line: 2, .. })));
        assert!(parse_text("step 1: (1,x)\n", t).is_err());
        assert!(parse_text("step 1: (0,2)\n", t).is_err());
        assert!(parse_text("stop 1: (1,2)\n", t).is_err());
        assert!(parse_text("step 1 (1,2)\n", t).is_err());
    }

    #[test]
    fn json_shape() {
        let s = parse_text("step 1: (1,2)\n", NetworkTopology::new(TopologyKind::Star, 2).unwrap()).unwrap();
        assert_eq!(
            to_json(&s),
            "{\"topology\":{\"kind\":\"star\",\"n_hosts\":2,\"exchangers_per_host\":1,\"has_center_switch\":true},\"steps\":[[[1,2]]]}\n"
        );
    }

    #[test]
    fn json_errors() {
        assert!(parse_json("{}").is_err());
        let bad = "{\"topology\":{\"kind\":\"star\",\"n_hosts\":2,\"exchangers_per_host\":1,\"has_center_switch\":true},\"steps\":[[[1,1]]]}";
        assert!(parse_json(bad).is_err());
        let zero = "{\"topology\":{\"kind\":\"star\",\"n_hosts\":2,\"exchangers_per_host\":1,\"has_center_switch\":true},\"steps\":[[[0,1]]]}";
        assert!(parse_json(zero).is_err());
    }

    proptest! {
        #[test]
        fn generated_schedules_round_trip(kind in prop::sample::select(TopologyKind::ALL.to_vec()), n in 2usize..=24) {
            let s = generate(kind, n).unwrap();
            let text = to_text(&s);
            let back = parse_text(&text, *s.topology()).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(to_text(&back), text);

            let json = to_json(&s);
            let back = parse_json(&json).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(to_json(&back), json);
        }
    }
}
