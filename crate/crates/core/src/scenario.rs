//! Scenario ingestion: the single JSON document that describes the network,
//! the radio grid, the flow set, and scheduler/simulator knobs.
//!
//! Unknown keys are rejected so that a typo in a scenario file fails loudly
//! instead of silently falling back to a default.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::flow::{FlowSpec, RadioConfig};
use crate::graph::{NetworkGraph, Node, NodeRole, WiredLink};
use crate::rational::{rational_from_f64, Rational};
use crate::time::{wire_span, TimeNs};
use crate::CoreError;

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub network: NetworkSection,
    pub radio: RadioSection,
    pub flows: Vec<FlowSection>,
    pub scheduler: SchedulerSection,
    pub sim: SimSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub nodes: Vec<NodeSection>,
    pub links: Vec<LinkSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub a: String,
    pub b: String,
    pub rate_bps: i64,
    pub prop_delay_ns: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub tti_ns: i64,
    pub k_max: usize,
    pub t_proc_ttis: i64,
    pub rb_bytes: RbBytesSection,
}

/// Per-RB capacity: one uniform value, or an explicit per-flow row of
/// `k_max` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RbBytesSection {
    Uniform(i64),
    PerFlow(std::collections::BTreeMap<String, Vec<i64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub id: String,
    pub period_ns: i64,
    pub length_bytes: i64,
    pub deadline_ns: i64,
    /// Node ids from UE to end station; the UE-to-gateway leg rides the
    /// shared uplink.
    pub route: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerSection {
    pub gamma: f64,
    pub min_p_ns: i64,
    #[serde(default)]
    pub big_m: BigMSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigMSection {
    #[default]
    Tight,
    #[serde(untagged)]
    Fixed(i64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub mode: AccessMode,
    pub jitter_ns: i64,
    pub skew_ns: i64,
    pub duration_ns: i64,
    pub seed: u64,
}

/// How 5G traffic enters the TSN domain: time-triggered (catch the prepared
/// window or wait a full period) or asynchronous (gateway stamps the waiting
/// time, edge switch holds the complement).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    Tam,
    Aam,
}

impl std::fmt::Display for AccessMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AccessMode::Tam => write!(f, "tam"),
            AccessMode::Aam => write!(f, "aam"),
        }
    }
}

// ---------------------------------------------------------------------------
// Validated scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BigMPolicy {
    /// Per-constraint constants computed from variable bounds.
    Tight,
    /// One fixed constant everywhere (diagnostics only).
    Fixed(i64),
}

#[derive(Debug, Clone)]
pub struct SchedulerConfig {
    pub gamma: Rational,
    pub min_p: TimeNs,
    pub big_m: BigMPolicy,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mode: AccessMode,
    pub jitter: TimeNs,
    pub skew: TimeNs,
    pub duration: TimeNs,
    pub seed: u64,
}

/// A fully validated scenario: the single source of truth consumed by the
/// model builder, the solver decode step, and the simulator.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: NetworkGraph,
    pub flows: Vec<FlowSpec>,
    pub radio: RadioConfig,
    pub scheduler: SchedulerConfig,
    pub sim: SimConfig,
    /// SHA-256 of the scenario JSON bytes, hex-encoded. Schedule files embed
    /// it so a schedule is never simulated against the wrong scenario.
    pub digest: String,
}

impl Scenario {
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Scenario, CoreError> {
        let file: ScenarioFile = serde_json::from_slice(bytes)
            .map_err(|e| CoreError::Validation(format!("scenario parse error: {}", e)))?;
        let digest = hex_digest(bytes);
        Scenario::from_file(&file, digest)
    }

    pub fn from_json_str(text: &str) -> Result<Scenario, CoreError> {
        Scenario::from_json_bytes(text.as_bytes())
    }

    pub fn from_file(file: &ScenarioFile, digest: String) -> Result<Scenario, CoreError> {
        let nodes: Vec<Node> = file
            .network
            .nodes
            .iter()
            .map(|n| Node {
                name: n.id.clone(),
                role: n.role,
            })
            .collect();
        {
            let mut names: Vec<&str> = file.network.nodes.iter().map(|n| n.id.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            if names.len() != file.network.nodes.len() {
                return Err(CoreError::Validation("duplicate node ids".into()));
            }
        }

        let find = |name: &str| -> Result<usize, CoreError> {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| CoreError::Validation(format!("unknown node id {:?}", name)))
        };

        let mut wired = Vec::with_capacity(file.network.links.len());
        for l in &file.network.links {
            let a = find(&l.a)?;
            let b = find(&l.b)?;
            if wired
                .iter()
                .any(|w: &WiredLink| (w.a, w.b) == (a, b) || (w.a, w.b) == (b, a))
            {
                return Err(CoreError::Validation(format!(
                    "duplicate wired link {} - {}",
                    l.a, l.b
                )));
            }
            if l.rate_bps <= 0 {
                return Err(CoreError::Validation(format!(
                    "link {} - {} has non-positive rate",
                    l.a, l.b
                )));
            }
            if l.prop_delay_ns < 0 {
                return Err(CoreError::Validation(format!(
                    "link {} - {} has negative propagation delay",
                    l.a, l.b
                )));
            }
            wired.push(WiredLink {
                a,
                b,
                rate_bits_per_sec: l.rate_bps,
                prop_delay: TimeNs(l.prop_delay_ns),
            });
        }

        let graph = NetworkGraph::derive(nodes, wired)?;

        if file.radio.tti_ns <= 0 {
            return Err(CoreError::Validation("tti_ns must be positive".into()));
        }
        if file.radio.k_max < 1 {
            return Err(CoreError::Validation("k_max must be at least 1".into()));
        }
        if file.radio.t_proc_ttis < 0 {
            return Err(CoreError::Validation("t_proc_ttis must be >= 0".into()));
        }

        let mut flows = Vec::with_capacity(file.flows.len());
        let mut rb_rows = Vec::with_capacity(file.flows.len());
        for f in &file.flows {
            if flows.iter().any(|x: &FlowSpec| x.id == f.id) {
                return Err(CoreError::Validation(format!("duplicate flow id {:?}", f.id)));
            }
            if f.period_ns <= 0 || f.deadline_ns <= 0 {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: period and deadline must be positive",
                    f.id
                )));
            }
            if f.length_bytes <= 0 {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: length_bytes must be positive",
                    f.id
                )));
            }
            let route = resolve_route(&graph, &f.id, &f.route)?;
            flows.push(FlowSpec {
                id: f.id.clone(),
                period: TimeNs(f.period_ns),
                length_bytes: f.length_bytes,
                deadline: TimeNs(f.deadline_ns),
                route,
            });
            let row = match &file.radio.rb_bytes {
                RbBytesSection::Uniform(v) => vec![*v; file.radio.k_max],
                RbBytesSection::PerFlow(map) => map
                    .get(&f.id)
                    .cloned()
                    .ok_or_else(|| {
                        CoreError::Validation(format!("rb_bytes missing row for flow {:?}", f.id))
                    })?,
            };
            if row.len() != file.radio.k_max {
                return Err(CoreError::Validation(format!(
                    "rb_bytes row for flow {:?} must have k_max = {} entries",
                    f.id, file.radio.k_max
                )));
            }
            if row.iter().any(|&v| v <= 0) {
                return Err(CoreError::Validation(format!(
                    "rb_bytes entries for flow {:?} must be strictly positive",
                    f.id
                )));
            }
            rb_rows.push(row);
        }

        let radio = RadioConfig {
            tti: TimeNs(file.radio.tti_ns),
            k_max: file.radio.k_max,
            proc_delay_gnb: TimeNs(file.radio.t_proc_ttis * file.radio.tti_ns),
            rb_bytes: rb_rows,
        };

        let gamma = rational_from_f64(file.scheduler.gamma)?;
        if gamma < Rational::new(0, 1) || gamma > Rational::new(1, 1) {
            return Err(CoreError::Validation(format!(
                "gamma must be within [0, 1], got {}",
                file.scheduler.gamma
            )));
        }
        if file.scheduler.min_p_ns <= 0 {
            return Err(CoreError::Validation("min_p_ns must be positive".into()));
        }
        let big_m = match file.scheduler.big_m {
            BigMSection::Tight => BigMPolicy::Tight,
            BigMSection::Fixed(v) if v > 0 => BigMPolicy::Fixed(v),
            BigMSection::Fixed(v) => {
                return Err(CoreError::Validation(format!(
                    "fixed big_m must be positive, got {}",
                    v
                )))
            }
        };

        if file.sim.jitter_ns < 0 || file.sim.skew_ns < 0 {
            return Err(CoreError::Validation(
                "jitter_ns and skew_ns must be >= 0".into(),
            ));
        }
        if file.sim.duration_ns <= 0 {
            return Err(CoreError::Validation("duration_ns must be positive".into()));
        }

        Ok(Scenario {
            graph,
            flows,
            radio,
            scheduler: SchedulerConfig {
                gamma,
                min_p: TimeNs(file.scheduler.min_p_ns),
                big_m,
            },
            sim: SimConfig {
                mode: file.sim.mode,
                jitter: TimeNs(file.sim.jitter_ns),
                skew: TimeNs(file.sim.skew_ns),
                duration: TimeNs(file.sim.duration_ns),
                seed: file.sim.seed,
            },
            digest,
        })
    }

    /// Wire transmission duration of this flow's frame on the given link.
    pub fn span(&self, flow_idx: usize, link: crate::graph::LinkId) -> TimeNs {
        let l = &self.graph.dataflow_links[link];
        wire_span(self.flows[flow_idx].length_bytes, l.rate_bits_per_sec)
            .expect("validated scenario has positive lengths and rates")
    }

    pub fn flow_index(&self, id: &str) -> Option<usize> {
        self.flows.iter().position(|f| f.id == id)
    }
}

fn resolve_route(
    graph: &NetworkGraph,
    flow_id: &str,
    route: &[String],
) -> Result<Vec<crate::graph::LinkId>, CoreError> {
    let err = |msg: String| CoreError::Validation(format!("flow {:?}: {}", flow_id, msg));
    if route.len() < 4 {
        return Err(err(
            "route needs at least UE, gateway, one switch, and an end station".into(),
        ));
    }
    let ids: Vec<usize> = route
        .iter()
        .map(|name| {
            graph
                .node_index(name)
                .ok_or_else(|| err(format!("unknown route node {:?}", name)))
        })
        .collect::<Result<_, _>>()?;

    let roles: Vec<NodeRole> = ids.iter().map(|&i| graph.nodes[i].role).collect();
    if roles[0] != NodeRole::UserEquipment {
        return Err(err("route must start at a user equipment node".into()));
    }
    if ids[1] != graph.gateway() {
        return Err(err("second route node must be the gateway".into()));
    }
    if *roles.last().unwrap() != NodeRole::EndStation {
        return Err(err("route must end at an end station".into()));
    }
    for (pos, role) in roles.iter().enumerate().take(roles.len() - 1).skip(2) {
        if *role != NodeRole::TsnSwitch {
            return Err(err(format!(
                "route node {:?} must be a TSN switch",
                route[pos]
            )));
        }
    }

    let mut links = vec![graph.uplink()];
    for w in ids[1..].windows(2) {
        let link = graph.tsn_link_between(w[0], w[1]).ok_or_else(|| {
            err(format!(
                "no wired link between {:?} and {:?}",
                graph.nodes[w[0]].name, graph.nodes[w[1]].name
            ))
        })?;
        links.push(link);
    }
    Ok(links)
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{:02x}", b)).collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    /// Minimal single-flow scenario shared by unit tests across modules.
    pub(crate) const TOY: &str = r#"{
      "network": {
        "nodes": [
          {"id": "ue1", "role": "user_equipment"},
          {"id": "gw", "role": "gateway"},
          {"id": "s1", "role": "tsn_switch"},
          {"id": "es1", "role": "end_station"}
        ],
        "links": [
          {"a": "gw", "b": "s1", "rate_bps": 100000000, "prop_delay_ns": 1000},
          {"a": "s1", "b": "es1", "rate_bps": 100000000, "prop_delay_ns": 1000}
        ]
      },
      "radio": {"tti_ns": 62500, "k_max": 2, "t_proc_ttis": 1, "rb_bytes": 96},
      "flows": [
        {"id": "f1", "period_ns": 500000, "length_bytes": 96, "deadline_ns": 500000,
         "route": ["ue1", "gw", "s1", "es1"]}
      ],
      "scheduler": {"gamma": 0.5, "min_p_ns": 100000},
      "sim": {"mode": "aam", "jitter_ns": 0, "skew_ns": 0, "duration_ns": 10000000, "seed": 1}
    }"#;
}

#[cfg(test)]
mod tests {
    use super::fixtures::TOY;
    use super::*;

    #[test]
    fn toy_scenario_parses() {
        let s = Scenario::from_json_str(TOY).unwrap();
        assert_eq!(s.flows.len(), 1);
        assert_eq!(s.flows[0].route.len(), 3);
        assert_eq!(s.flows[0].route[0], s.graph.uplink());
        assert_eq!(s.flows[0].scheduled_route().len(), 1);
        assert_eq!(s.scheduler.gamma, Rational::new(1, 2));
        assert_eq!(s.span(0, s.flows[0].route[1]), TimeNs(7680));
        assert_eq!(s.digest.len(), 64);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = TOY.replace("\"seed\": 1", "\"seed\": 1, \"extra\": 2");
        assert!(Scenario::from_json_str(&bad).is_err());
    }

    #[test]
    fn zero_length_rejected() {
        let bad = TOY.replace("\"length_bytes\": 96", "\"length_bytes\": 0");
        assert!(Scenario::from_json_str(&bad).is_err());
    }

    #[test]
    fn gamma_out_of_range_rejected() {
        let bad = TOY.replace("\"gamma\": 0.5", "\"gamma\": 1.2");
        let err = Scenario::from_json_str(&bad).unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn short_route_rejected() {
        let bad = TOY.replace(
            "[\"ue1\", \"gw\", \"s1\", \"es1\"]",
            "[\"ue1\", \"gw\", \"es1\"]",
        );
        assert!(Scenario::from_json_str(&bad).is_err());
    }

    #[test]
    fn route_over_missing_link_rejected() {
        let bad = TOY.replace(
            "{\"a\": \"s1\", \"b\": \"es1\", \"rate_bps\": 100000000, \"prop_delay_ns\": 1000}",
            "{\"a\": \"s1\", \"b\": \"es1\", \"rate_bps\": 100000000, \"prop_delay_ns\": 1000},
             {\"a\": \"gw\", \"b\": \"es1\", \"rate_bps\": 100000000, \"prop_delay_ns\": 1000}",
        )
        .replace("period_ns\": 500000", "period_ns\": 500000");
        // remove the gw-s1 hop from the route: gw -> es1 has a link now but es1
        // is not a switch, so the 4-node rule still applies via s1 removal
        let bad = bad.replace(
            "[\"ue1\", \"gw\", \"s1\", \"es1\"]",
            "[\"ue1\", \"gw\", \"es1\", \"es1\"]",
        );
        assert!(Scenario::from_json_str(&bad).is_err());
    }

    #[test]
    fn digest_changes_with_content() {
        let a = hex_digest(TOY.as_bytes());
        let b = hex_digest(TOY.replace(' ', "  ").as_bytes());
        assert_ne!(a, b);
    }
}
