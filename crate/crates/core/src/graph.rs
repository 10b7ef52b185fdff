//! Converged network topology: nodes, physical wired links, and the
//! directed dataflow links the scheduler operates on.
//!
//! Every full-duplex physical link yields two directed dataflow links; the
//! whole 5G segment is abstracted as a single shared uplink dataflow link
//! that delivers into the gateway.

use serde::{Deserialize, Serialize};

use crate::time::TimeNs;
use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    EndStation,
    TsnSwitch,
    Gateway,
    BaseStation,
    UserEquipment,
}

/// Index into [`NetworkGraph::nodes`].
pub type NodeId = usize;

/// Index into [`NetworkGraph::dataflow_links`].
pub type LinkId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub role: NodeRole,
}

/// An undirected physical wired link with its per-direction parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiredLink {
    pub a: NodeId,
    pub b: NodeId,
    pub rate_bits_per_sec: i64,
    pub prop_delay: TimeNs,
}

/// One directed dataflow link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataflowLink {
    pub from: Option<NodeId>,
    pub to: NodeId,
    pub rate_bits_per_sec: i64,
    pub prop_delay: TimeNs,
    pub kind: LinkKind,
    /// Stable human-readable name used in variable/constraint tags.
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Tsn,
    FiveGUplink,
}

#[derive(Debug, Clone)]
pub struct NetworkGraph {
    pub nodes: Vec<Node>,
    pub wired_links: Vec<WiredLink>,
    /// 2 * |wired_links| TSN links first (both directions per physical link,
    /// in input order), then the single 5G uplink link.
    pub dataflow_links: Vec<DataflowLink>,
}

impl NetworkGraph {
    /// Build the dataflow-link set from nodes and physical links.
    ///
    /// Each physical link (a, b) contributes the directed links [a, b] and
    /// [b, a]; one shared 5G uplink link is appended last, terminating at the
    /// gateway. Deriving twice from the same inputs yields the same links.
    pub fn derive(nodes: Vec<Node>, wired_links: Vec<WiredLink>) -> Result<Self, CoreError> {
        if wired_links.is_empty() {
            return Err(CoreError::Validation(
                "network has no wired links".into(),
            ));
        }
        let gateways: Vec<NodeId> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.role == NodeRole::Gateway)
            .map(|(i, _)| i)
            .collect();
        if gateways.len() != 1 {
            return Err(CoreError::Validation(format!(
                "expected exactly one gateway node, found {}",
                gateways.len()
            )));
        }
        let gateway = gateways[0];

        let mut dataflow_links = Vec::with_capacity(wired_links.len() * 2 + 1);
        for wl in &wired_links {
            for node in [wl.a, wl.b] {
                if node >= nodes.len() {
                    return Err(CoreError::Validation(format!(
                        "wired link references unknown node index {}",
                        node
                    )));
                }
            }
            if wl.a == wl.b {
                return Err(CoreError::Validation(format!(
                    "self-loop wired link at node {}",
                    nodes[wl.a].name
                )));
            }
            for (from, to) in [(wl.a, wl.b), (wl.b, wl.a)] {
                dataflow_links.push(DataflowLink {
                    from: Some(from),
                    to,
                    rate_bits_per_sec: wl.rate_bits_per_sec,
                    prop_delay: wl.prop_delay,
                    kind: LinkKind::Tsn,
                    name: format!("{}_{}", nodes[from].name, nodes[to].name),
                });
            }
        }
        dataflow_links.push(DataflowLink {
            from: None,
            to: gateway,
            rate_bits_per_sec: 0,
            prop_delay: TimeNs::ZERO,
            kind: LinkKind::FiveGUplink,
            name: "uplink".into(),
        });

        Ok(NetworkGraph {
            nodes,
            wired_links,
            dataflow_links,
        })
    }

    pub fn uplink(&self) -> LinkId {
        self.dataflow_links.len() - 1
    }

    pub fn gateway(&self) -> NodeId {
        self.dataflow_links[self.uplink()].to
    }

    pub fn tsn_link_between(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.dataflow_links
            .iter()
            .position(|l| l.kind == LinkKind::Tsn && l.from == Some(from) && l.to == to)
    }

    pub fn node_index(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(name: &str, role: NodeRole) -> Node {
        Node {
            name: name.into(),
            role,
        }
    }

    fn wire(a: NodeId, b: NodeId) -> WiredLink {
        WiredLink {
            a,
            b,
            rate_bits_per_sec: 100_000_000,
            prop_delay: TimeNs(1_000),
        }
    }

    #[test]
    fn two_wired_links_yield_four_plus_uplink() {
        let nodes = vec![
            node("gw", NodeRole::Gateway),
            node("s1", NodeRole::TsnSwitch),
            node("es1", NodeRole::EndStation),
        ];
        let g = NetworkGraph::derive(nodes, vec![wire(0, 1), wire(1, 2)]).unwrap();
        assert_eq!(g.dataflow_links.len(), 5);
        assert_eq!(
            g.dataflow_links
                .iter()
                .filter(|l| l.kind == LinkKind::Tsn)
                .count(),
            4
        );
        assert_eq!(g.dataflow_links[g.uplink()].kind, LinkKind::FiveGUplink);
        assert_eq!(g.gateway(), 0);
    }

    #[test]
    fn no_wired_links_rejected() {
        let nodes = vec![node("gw", NodeRole::Gateway)];
        assert!(NetworkGraph::derive(nodes, vec![]).is_err());
    }

    #[test]
    fn switch_line_topology_link_count() {
        // gateway plus three switches in a line: 3 physical edges -> 6 TSN links
        let nodes = vec![
            node("gw", NodeRole::Gateway),
            node("s1", NodeRole::TsnSwitch),
            node("s2", NodeRole::TsnSwitch),
            node("s3", NodeRole::TsnSwitch),
        ];
        let g = NetworkGraph::derive(nodes, vec![wire(0, 1), wire(1, 2), wire(2, 3)]).unwrap();
        assert_eq!(
            g.dataflow_links
                .iter()
                .filter(|l| l.kind == LinkKind::Tsn)
                .count(),
            6
        );
    }

    #[test]
    fn derivation_is_deterministic() {
        let mk = || {
            let nodes = vec![
                node("gw", NodeRole::Gateway),
                node("s1", NodeRole::TsnSwitch),
                node("es1", NodeRole::EndStation),
            ];
            NetworkGraph::derive(nodes, vec![wire(0, 1), wire(1, 2)]).unwrap()
        };
        let g1 = mk();
        let g2 = mk();
        assert_eq!(g1.dataflow_links, g2.dataflow_links);
    }

    #[test]
    fn both_directions_exist_per_physical_link() {
        let nodes = vec![
            node("gw", NodeRole::Gateway),
            node("s1", NodeRole::TsnSwitch),
        ];
        let g = NetworkGraph::derive(nodes, vec![wire(0, 1)]).unwrap();
        assert!(g.tsn_link_between(0, 1).is_some());
        assert!(g.tsn_link_between(1, 0).is_some());
    }
}
