//! Tree protocols: each internal node is owned by one party and emits a bit
//! whose law depends on that party's input symbol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::MASS_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Party1,
    Party2,
}

impl Owner {
    pub fn other(self) -> Owner {
        match self {
            Owner::Party1 => Owner::Party2,
            Owner::Party2 => Owner::Party1,
        }
    }

    /// Party 1 transmits in odd rounds, party 2 in even rounds.
    pub fn of_round(t: usize) -> Owner {
        if t % 2 == 1 {
            Owner::Party1
        } else {
            Owner::Party2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Node {
    Internal {
        owner: Owner,
        /// `p_one[s]`: probability that the bit is 1 when the owner's input is `s`.
        p_one: Vec<f64>,
        children: [usize; 2],
    },
    Leaf {
        label: String,
    },
}

/// A validated protocol tree rooted at node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeDoc", into = "TreeDoc")]
pub struct ProtocolTree {
    nodes: Vec<Node>,
    parent: Vec<Option<usize>>,
    /// Round number of every node; leaves get the round of their parent's run plus one.
    round: Vec<usize>,
    leaves: Vec<usize>,
    leaf_index: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub nodes: Vec<Node>,
}

impl TryFrom<TreeDoc> for ProtocolTree {
    type Error = Error;
    fn try_from(doc: TreeDoc) -> Result<Self> {
        ProtocolTree::new(doc.nodes)
    }
}

impl From<ProtocolTree> for TreeDoc {
    fn from(t: ProtocolTree) -> Self {
        TreeDoc { nodes: t.nodes }
    }
}

/// One possible message of a round: the node where the run ends and the
/// probability of reaching it for every input symbol of the transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundEnd {
    pub node: usize,
    pub prob: Vec<f64>,
}

impl ProtocolTree {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidProtocol("tree has no nodes".into()));
        }
        let n = nodes.len();
        let mut parent = vec![None; n];
        let mut sizes: [Option<usize>; 2] = [None, None];
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Internal { owner, p_one, children } = node {
                for &c in children {
                    if c == 0 || c >= n || c == i {
                        return Err(Error::InvalidProtocol(format!("node {i} has invalid child {c}")));
                    }
                    if parent[c].is_some() {
                        return Err(Error::InvalidProtocol(format!("node {c} has two parents")));
                    }
                    parent[c] = Some(i);
                }
                if let Some(bad) = p_one.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::InvalidProtocol(format!("node {i} has bit probability {bad}")));
                }
                let slot = &mut sizes[*owner as usize];
                match slot {
                    Some(s) if *s != p_one.len() => {
                        return Err(Error::InvalidProtocol(format!(
                            "node {i}: bit law over {} symbols, other nodes of the same owner use {s}",
                            p_one.len()
                        )))
                    }
                    _ => *slot = Some(p_one.len()),
                }
            }
        }
        if let Node::Internal { owner: Owner::Party2, .. } = nodes[0] {
            return Err(Error::InvalidProtocol("party 1 must own the root".into()));
        }
        // reachability from the root, which also rules out cycles
        let mut round = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        round[0] = 1;
        let mut leaves = Vec::new();
        let mut order = Vec::new();
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(Error::InvalidProtocol("tree contains a cycle".into()));
            }
            seen[v] = true;
            order.push(v);
            match &nodes[v] {
                Node::Internal { owner, children, .. } => {
                    for &c in children.iter().rev() {
                        round[c] = match &nodes[c] {
                            Node::Internal { owner: oc, .. } if oc == owner => round[v],
                            _ => round[v] + 1,
                        };
                        stack.push(c);
                    }
                }
                Node::Leaf { .. } => leaves.push(v),
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidProtocol("some nodes are unreachable from the root".into()));
        }
        let mut leaf_index = vec![None; n];
        let mut labels = std::collections::BTreeSet::new();
        for (i, &v) in leaves.iter().enumerate() {
            leaf_index[v] = Some(i);
            if let Node::Leaf { label } = &nodes[v] {
                if !labels.insert(label.clone()) {
                    return Err(Error::InvalidProtocol(format!("duplicate leaf label {label}")));
                }
            }
        }
        if nodes.len() == 1 {
            round[0] = 0;
        }
        Ok(Self { nodes, parent, round, leaves, leaf_index })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        matches!(self.nodes[v], Node::Leaf { .. })
    }

    pub fn owner(&self, v: usize) -> Option<Owner> {
        match &self.nodes[v] {
            Node::Internal { owner, .. } => Some(*owner),
            Node::Leaf { .. } => None,
        }
    }

    /// Leaf nodes in depth-first order; their positions are the transcript indices.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn leaf_index(&self, v: usize) -> Option<usize> {
        self.leaf_index[v]
    }

    pub fn leaf_labels(&self) -> Vec<String> {
        self.leaves
            .iter()
            .map(|&v| match &self.nodes[v] {
                Node::Leaf { label } => label.clone(),
                Node::Internal { .. } => unreachable!(),
            })
            .collect()
    }

    /// Round in which a node is reached (the root run is round 1).
    pub fn round_of(&self, v: usize) -> usize {
        self.round[v]
    }

    /// Maximum number of rounds over all leaves.
    pub fn rounds(&self) -> usize {
        self.leaves.iter().map(|&v| self.round[v].saturating_sub(1)).max().unwrap_or(0)
    }

    /// Alphabet size expected for each party's input (None if the party owns no node).
    pub fn alphabet_size(&self, owner: Owner) -> Option<usize> {
        self.nodes.iter().find_map(|n| match n {
            Node::Internal { owner: o, p_one, .. } if *o == owner => Some(p_one.len()),
            _ => None,
        })
    }

    pub fn check_alphabets(&self, nx: usize, ny: usize) -> Result<()> {
        for (owner, size) in [(Owner::Party1, nx), (Owner::Party2, ny)] {
            if let Some(s) = self.alphabet_size(owner) {
                if s != size {
                    return Err(Error::AlphabetMismatch(format!(
                        "{owner:?} bit laws cover {s} symbols but the alphabet has {size}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Probability of the path from the root to `v` split into the two
    /// parties' factors: `P(reach v | x, y) = a1[x] · a2[y]`.
    pub fn path_weights(&self, v: usize, nx: usize, ny: usize) -> (Vec<f64>, Vec<f64>) {
        let mut a1 = vec![1.0; nx];
        let mut a2 = vec![1.0; ny];
        let mut child = v;
        while let Some(p) = self.parent[child] {
            if let Node::Internal { owner, p_one, children } = &self.nodes[p] {
                let bit = usize::from(children[1] == child);
                let target = match owner {
                    Owner::Party1 => &mut a1,
                    Owner::Party2 => &mut a2,
                };
                for (s, w) in target.iter_mut().enumerate() {
                    *w *= if bit == 1 { p_one[s] } else { 1.0 - p_one[s] };
                }
            }
            child = p;
        }
        (a1, a2)
    }

    /// The possible outcomes of the round that starts at internal node `v`:
    /// the nodes where the owner's run ends, with their probabilities.
    pub fn round_ends(&self, v: usize) -> Vec<RoundEnd> {
        let owner = match self.owner(v) {
            Some(o) => o,
            None => return vec![],
        };
        let size = self.alphabet_size(owner).unwrap_or(0);
        let mut out = Vec::new();
        let mut stack = vec![(v, vec![1.0; size])];
        while let Some((u, w)) = stack.pop() {
            match &self.nodes[u] {
                Node::Internal { owner: o, p_one, children } if *o == owner => {
                    for (bit, &c) in children.iter().enumerate().rev() {
                        let cw: Vec<f64> = w
                            .iter()
                            .zip(p_one)
                            .map(|(a, p)| a * if bit == 1 { *p } else { 1.0 - p })
                            .collect();
                        stack.push((c, cw));
                    }
                }
                _ => out.push(RoundEnd { node: u, prob: w }),
            }
        }
        for s in 0..size {
            let total: f64 = out.iter().map(|e| e.prob[s]).sum();
            debug_assert!((total - 1.0).abs() < 1e-6 + MASS_TOLERANCE);
        }
        out
    }

    /// Internal nodes at which a round starts.
    pub fn round_starts(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| {
                !self.is_leaf(v)
                    && match self.parent[v] {
                        None => true,
                        Some(p) => self.owner(p) != self.owner(v),
                    }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(s: &str) -> Node {
        Node::Leaf { label: s.into() }
    }

    #[test]
    fn single_leaf_tree() {
        let t = ProtocolTree::new(vec![leaf("c")]).unwrap();
        assert_eq!(t.rounds(), 0);
        assert_eq!(t.leaves(), &[0]);
    }

    #[test]
    fn rejects_party2_root_and_cycles() {
        let bad_root = vec![
            Node::Internal { owner: Owner::Party2, p_one: vec![0.5], children: [1, 2] },
            leaf("0"),
            leaf("1"),
        ];
        assert!(ProtocolTree::new(bad_root).is_err());
        let shared = vec![
            Node::Internal { owner: Owner::Party1, p_one: vec![0.5], children: [1, 1] },
            leaf("0"),
        ];
        assert!(ProtocolTree::new(shared).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = ProtocolTree::new(vec![
            Node::Internal { owner: Owner::Party1, p_one: vec![0.0, 1.0], children: [1, 2] },
            leaf("0"),
            leaf("1"),
        ])
        .unwrap();
        let back = ProtocolTree::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(t, back);
        assert_eq!(back.rounds(), 1);
    }
}
