//! Builders for the named protocols used throughout the crate.

use crate::error::{Error, Result};
use crate::probcore::JointSource;
use crate::protocol::law::TranscriptLaw;
use crate::protocol::tree::{Node, Owner, ProtocolTree};

struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    fn reserve(&mut self) -> usize {
        self.nodes.push(Node::Leaf { label: String::new() });
        self.nodes.len() - 1
    }

    /// Writes at `at` a subtree in which `owner` spells out the index of its
    /// symbol within `lo..hi` by binary splitting; `leaf` completes each branch.
    fn spell<F>(&mut self, at: usize, owner: Owner, size: usize, lo: usize, hi: usize, leaf: &mut F)
    where
        F: FnMut(&mut Builder, usize, usize),
    {
        if hi - lo == 1 {
            leaf(self, at, lo);
            return;
        }
        let mid = lo + (hi - lo).div_ceil(2);
        let p_one = (0..size).map(|s| if s >= mid && s < hi { 1.0 } else { 0.0 }).collect();
        let c0 = self.reserve();
        let c1 = self.reserve();
        self.nodes[at] = Node::Internal { owner, p_one, children: [c0, c1] };
        self.spell(c0, owner, size, lo, mid, leaf);
        self.spell(c1, owner, size, mid, hi, leaf);
    }

    fn finish(self) -> ProtocolTree {
        ProtocolTree::new(self.nodes).expect("generated trees are well formed")
    }
}

/// The protocol that sends nothing.
pub fn constant() -> ProtocolTree {
    ProtocolTree::new(vec![Node::Leaf { label: "-".into() }]).expect("single leaf")
}

/// Party 1 sends `X` (one round, `⌈log₂|X|⌉` bits at most).
pub fn send_x(source: &JointSource) -> ProtocolTree {
    let labels = source.x_alphabet().to_vec();
    let nx = labels.len();
    let mut b = Builder::new();
    let root = b.reserve();
    b.spell(root, Owner::Party1, nx, 0, nx, &mut |b, at, x| {
        b.nodes[at] = Node::Leaf { label: labels[x].clone() };
    });
    b.finish()
}

/// Party 1 sends `X`, then party 2 sends `Y`: the data-exchange protocol.
pub fn data_exchange(source: &JointSource) -> ProtocolTree {
    let xs = source.x_alphabet().to_vec();
    let ys = source.y_alphabet().to_vec();
    let (nx, ny) = (xs.len(), ys.len());
    let mut b = Builder::new();
    let root = b.reserve();
    b.spell(root, Owner::Party1, nx, 0, nx, &mut |b, at, x| {
        b.spell(at, Owner::Party2, ny, 0, ny, &mut |b, at2, y| {
            b.nodes[at2] = Node::Leaf { label: format!("{}|{}", xs[x], ys[y]) };
        });
    });
    b.finish()
}

fn check_crossover(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::ParameterRange(format!("crossover {c} not in [0,1]")));
    }
    Ok(())
}

/// Appends at `at` a run of `k` bits by `owner`: bit `j` (most significant
/// first) is the owner's bit `j` flipped with probability `c`.
fn noisy_bits<F>(b: &mut Builder, at: usize, owner: Owner, k: u32, c: f64, prefix: String, leaf: &mut F)
where
    F: FnMut(&mut Builder, usize, String),
{
    if prefix.len() == k as usize {
        leaf(b, at, prefix);
        return;
    }
    let j = prefix.len();
    let size = 1usize << k;
    let p_one = (0..size).map(|s| if (s >> (k as usize - 1 - j)) & 1 == 1 { 1.0 - c } else { c }).collect();
    let c0 = b.reserve();
    let c1 = b.reserve();
    b.nodes[at] = Node::Internal { owner, p_one, children: [c0, c1] };
    noisy_bits(b, c0, owner, k, c, format!("{prefix}0"), leaf);
    noisy_bits(b, c1, owner, k, c, format!("{prefix}1"), leaf);
}

/// Party 1 sends its `k`-bit input through a binary symmetric channel with crossover `c`.
pub fn bsc(k: u32, c: f64) -> Result<ProtocolTree> {
    check_crossover(c)?;
    let mut b = Builder::new();
    let root = b.reserve();
    noisy_bits(&mut b, root, Owner::Party1, k, c, String::new(), &mut |b, at, s| {
        b.nodes[at] = Node::Leaf { label: s };
    });
    Ok(b.finish())
}

/// Both parties send their `k`-bit inputs through a BSC(`c`), party 1 first.
pub fn noisy_exchange(k: u32, c: f64) -> Result<ProtocolTree> {
    check_crossover(c)?;
    let mut b = Builder::new();
    let root = b.reserve();
    noisy_bits(&mut b, root, Owner::Party1, k, c, String::new(), &mut |b, at, s1| {
        noisy_bits(b, at, Owner::Party2, k, c, String::new(), &mut |b, at2, s2| {
            b.nodes[at2] = Node::Leaf { label: format!("{s1}|{s2}") };
        });
    });
    Ok(b.finish())
}

/// Party 1 sends its `k`-bit `X`, party 2 replies with `X ⊕ Y`.
pub fn xor_reply(k: u32) -> ProtocolTree {
    let size = 1usize << k;
    let mut b = Builder::new();
    let root = b.reserve();
    b.spell(root, Owner::Party1, size, 0, size, &mut |b, at, x| {
        // party 2's reply is a deterministic function of (x, y); spell x ^ y
        reply(b, at, k, x, 0, 0, size);
    });
    b.finish()
}

fn reply(b: &mut Builder, at: usize, k: u32, x: usize, depth: u32, acc: usize, size: usize) {
    if depth == k {
        b.nodes[at] = Node::Leaf { label: format!("{:0w$b}|{:0w$b}", x, acc, w = k as usize) };
        return;
    }
    let shift = k - 1 - depth;
    let p_one = (0..size).map(|y| (((x ^ y) >> shift) & 1) as f64).collect();
    let c0 = b.reserve();
    let c1 = b.reserve();
    b.nodes[at] = Node::Internal { owner: Owner::Party2, p_one, children: [c0, c1] };
    reply(b, c0, k, x, depth + 1, acc << 1, size);
    reply(b, c1, k, x, depth + 1, (acc << 1) | 1, size);
}

/// Transcript law of the data-exchange protocol `Π = (X, Y)`.
pub fn data_exchange_protocol(source: &JointSource) -> Result<TranscriptLaw> {
    TranscriptLaw::from_tree(&data_exchange(source), source)
}
