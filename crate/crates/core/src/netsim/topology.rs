use serde::{Deserialize, Serialize};

use super::clock::ClockMode;
use super::link::LinkParams;
use super::sim::Network;
use super::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Vehicle,
    Rsu,
    Worker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub link_id: String,
    pub src: String,
    pub dst: String,
    #[serde(flatten)]
    pub params: LinkParams,
}

/// Nodes and links of a simulated deployment, as read from topology JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
}

impl Topology {
    pub fn from_json(text: &str) -> Result<Self, NetError> {
        serde_json::from_str(text).map_err(|e| NetError::BadTopology(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn nodes_with_role(&self, role: NodeRole) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().filter(move |n| n.role == role)
    }

    pub fn link(&self, src: &str, dst: &str) -> Option<&LinkSpec> {
        self.links.iter().find(|l| l.src == src && l.dst == dst)
    }

    pub fn build<T: std::fmt::Debug>(&self, mode: ClockMode, seed: u64) -> Result<Network<T>, NetError> {
        let mut net = Network::new(mode, seed);
        for n in &self.nodes {
            if net.node_by_name(&n.name).is_some() {
                return Err(NetError::BadTopology(format!("duplicate node {}", n.name)));
            }
            net.add_node(n.name.clone());
        }
        for l in &self.links {
            let resolve = |name: &str| net.node_by_name(name).ok_or_else(|| NetError::BadTopology(format!("link {} names unknown node {name}", l.link_id)));
            let (src, dst) = (resolve(&l.src)?, resolve(&l.dst)?);
            net.add_link(l.link_id.clone(), src, dst, l.params)?;
        }
        Ok(net)
    }
}
