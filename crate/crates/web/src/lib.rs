//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function returns a JSON document, or throws a string on bad
//! input. The plain-Rust `*_json` functions carry the logic so they can be
//! tested natively.

use keynet_core::analysis::{build_sbep_table, sbep_regression};
use keynet_core::protocols::generate_star;
use keynet_core::schedule::{host_states, HostState};
use keynet_core::simengine::{self, utilization_profile, SimConfig, TimedFailure};
use keynet_core::{NetworkTopology, TopologyKind};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Larger stars render poorly and gain nothing as a demo.
const MAX_DEMO_HOSTS: usize = 64;

#[derive(Serialize)]
struct HostCell {
    host: usize,
    state: &'static str,
    peer: Option<usize>,
}

#[derive(Serialize)]
struct StepView {
    index: usize,
    exchanges: Vec<[usize; 2]>,
    hosts: Vec<HostCell>,
}

#[derive(Serialize)]
struct StarView {
    n: usize,
    steps: Vec<StepView>,
}

fn check_size(n: usize) -> Result<(), String> {
    if (2..=MAX_DEMO_HOSTS).contains(&n) {
        Ok(())
    } else {
        Err(format!("host count must be between 2 and {MAX_DEMO_HOSTS}"))
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn star_schedule_json(n: usize) -> Result<String, String> {
    check_size(n)?;
    let schedule = generate_star(n).map_err(|e| e.to_string())?;
    let mut steps = Vec::with_capacity(schedule.len());
    for step in schedule.steps() {
        let states = host_states(step, n).map_err(|e| e.to_string())?;
        let hosts = states
            .into_iter()
            .map(|(h, s)| {
                let (state, peer) = match s {
                    HostState::Initiator(p) => ("initiator", Some(p.index())),
                    HostState::Utilized(p) => ("utilized", Some(p.index())),
                    HostState::Inactive => ("inactive", None),
                };
                HostCell { host: h.index(), state, peer }
            })
            .collect();
        let exchanges = step.exchanges.iter().map(|e| [e.initiator.index(), e.responder.index()]).collect();
        steps.push(StepView { index: step.index, exchanges, hosts });
    }
    to_json(&StarView { n, steps })
}

#[derive(Serialize)]
struct RegressionView {
    points: Vec<[usize; 2]>,
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

pub fn sbep_regression_json(n_max: usize) -> Result<String, String> {
    if !(3..=200).contains(&n_max) {
        return Err("largest host count must be between 3 and 200".into());
    }
    let table = build_sbep_table(n_max).map_err(|e| e.to_string())?;
    let fit = sbep_regression(n_max).map_err(|e| e.to_string())?;
    to_json(&RegressionView {
        points: table.iter().map(|c| [c.n, c.steps]).collect(),
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    })
}

#[derive(Serialize)]
struct SimView {
    steps_executed: usize,
    schedule_len: usize,
    pairs: Vec<(String, u32)>,
    lost_pairs: Vec<String>,
    utilization_min: f64,
    utilization_mean: f64,
    utilization_max: f64,
}

/// `failures` is a whitespace- or comma-separated list such as `center@4 ke:2@1`.
pub fn simulate_json(kind: &str, n: usize, k: u32, failures: &str) -> Result<String, String> {
    check_size(n)?;
    if !(1..=64).contains(&k) {
        return Err("key length must be between 1 and 64 bits".into());
    }
    let kind: TopologyKind = kind.parse().map_err(|e: keynet_core::Error| e.to_string())?;
    let failures = failures
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<TimedFailure>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let topology = NetworkTopology::new(kind, n).map_err(|e| e.to_string())?;
    let config = SimConfig::new(topology, k, failures).map_err(|e| e.to_string())?;
    let report = simengine::run(&config).map_err(|e| e.to_string())?;
    let u = utilization_profile(&report);
    to_json(&SimView {
        steps_executed: report.steps_executed,
        schedule_len: report.schedule_len,
        pairs: report.bits_per_pair.iter().map(|(p, &b)| (p.to_string(), b)).collect(),
        lost_pairs: report.lost_pairs.iter().map(|p| p.to_string()).collect(),
        utilization_min: u.min,
        utilization_mean: u.mean,
        utilization_max: u.max,
    })
}

#[wasm_bindgen]
pub fn star_schedule(n: usize) -> Result<String, JsValue> {
    star_schedule_json(n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn regression(n_max: usize) -> Result<String, JsValue> {
    sbep_regression_json(n_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(kind: &str, n: usize, k: u32, failures: &str) -> Result<String, JsValue> {
    simulate_json(kind, n, k, failures).map_err(|e| JsValue::from_str(&e))
}
