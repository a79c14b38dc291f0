//! Structural unfolding: a seed pointed graph is expanded into the stage-α
//! walk tree, each tree node gets a modal label built bottom-up with the
//! unfolding operator `△`, and the tree becomes a Kripke model whose worlds
//! are the walks.
//!
//! Walk keys are deterministic and prefix-stable: the root is `ε` and the
//! child reached along the k-th outgoing edge of a node (edges ordered by
//! target id) appends `/k`. A deeper stage therefore extends the node
//! sequence of a shallower one without reordering it, which is what lets a
//! stage state embed into the next one by zero padding.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::emit::{dot_id, json_string};
use crate::error::{Error, Result};
use crate::formula::{triangle, Formula};
use crate::kripke::{build_model, KripkeModel, WorldId};

/// Root walk key.
pub const ROOT_KEY: &str = "\u{03B5}";

/// Seed pointed graph. Edges run parent → member; atom nodes terminate
/// unfolding (an optional self-loop on an atom is allowed but carries no
/// structure). Cycles and self-loops on non-atom nodes are legal and unfold
/// into walks truncated at the stage depth.
#[derive(Clone, Debug)]
pub struct SeedGraph {
    nodes: BTreeSet<String>,
    root: String,
    atoms: BTreeSet<String>,
    outgoing: BTreeMap<String, Vec<String>>,
}

impl SeedGraph {
    pub fn new<N, E, A>(nodes: N, edges: E, root: impl Into<String>, atoms: A) -> Result<SeedGraph>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        E: IntoIterator<Item = (N::Item, N::Item)>,
        A: IntoIterator,
        A::Item: Into<String>,
    {
        let nodes: BTreeSet<String> = nodes.into_iter().map(Into::into).collect();
        let root = root.into();
        if !nodes.contains(&root) {
            return Err(Error::RootMissing(root));
        }
        let atoms: BTreeSet<String> = atoms.into_iter().map(Into::into).collect();
        for a in &atoms {
            if !nodes.contains(a) {
                return Err(Error::DanglingNode(a.clone()));
            }
        }
        let mut edge_set: BTreeSet<(String, String)> = BTreeSet::new();
        for (a, b) in edges {
            let a = a.into();
            let b = b.into();
            if !nodes.contains(&a) {
                return Err(Error::DanglingNode(a));
            }
            if !nodes.contains(&b) {
                return Err(Error::DanglingNode(b));
            }
            edge_set.insert((a, b));
        }
        let mut outgoing: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (a, b) in &edge_set {
            if atoms.contains(a) && a != b {
                return Err(Error::AtomWithEdges(a.clone()));
            }
            outgoing.entry(a.clone()).or_default().push(b.clone());
        }
        Ok(SeedGraph {
            nodes,
            root,
            atoms,
            outgoing,
        })
    }

    /// Parse `{"nodes":[...], "edges":[["u","a1"],...], "root":"u",
    /// "atoms":["a1",...]}`.
    pub fn from_json(text: &str) -> Result<SeedGraph> {
        #[derive(Deserialize)]
        struct SeedJson {
            nodes: Vec<String>,
            #[serde(default)]
            edges: Vec<(String, String)>,
            root: String,
            #[serde(default)]
            atoms: Vec<String>,
        }
        let s: SeedJson = serde_json::from_str(text)?;
        SeedGraph::new(s.nodes, s.edges, s.root, s.atoms)
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn is_atom(&self, node: &str) -> bool {
        self.atoms.contains(node)
    }

    /// Members of `node` in canonical order (targets sorted by id). Atoms
    /// have no members regardless of a decorative self-loop.
    pub fn members(&self, node: &str) -> &[String] {
        if self.atoms.contains(node) {
            return &[];
        }
        self.outgoing.get(node).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// One node of the unfolding tree.
#[derive(Clone, Debug)]
pub struct TreeNode {
    pub walk: String,
    pub depth: usize,
    pub graph_node: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub formula: Formula,
}

/// The stage-α unfolding tree in canonical BFS order, root first.
#[derive(Clone, Debug)]
pub struct UnfoldTree {
    alpha: usize,
    nodes: Vec<TreeNode>,
}

impl UnfoldTree {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }
}

/// Caps guarding exponential blowup of cyclic seeds.
#[derive(Clone, Copy, Debug)]
pub struct UnfoldLimits {
    pub depth_cap: usize,
    pub node_cap: u64,
}

impl Default for UnfoldLimits {
    fn default() -> Self {
        UnfoldLimits {
            depth_cap: 12,
            node_cap: 1_000_000,
        }
    }
}

/// A stage: the unfolding tree plus its Kripke model. Worlds are walk keys,
/// the relation is parent → child plus a self-loop at every world, and the
/// valuation assigns each world its own walk key as the single true atom.
#[derive(Clone, Debug)]
pub struct StageModel {
    tree: UnfoldTree,
    kripke: KripkeModel,
}

impl StageModel {
    pub fn alpha(&self) -> usize {
        self.tree.alpha
    }

    pub fn tree(&self) -> &UnfoldTree {
        &self.tree
    }

    pub fn kripke(&self) -> &KripkeModel {
        &self.kripke
    }

    /// `Z_U`: one for the point plus all children-set sizes; equals the
    /// world count.
    pub fn z_u(&self) -> usize {
        self.tree.len()
    }

    /// The distinguished point world (the root walk).
    pub fn point(&self) -> &WorldId {
        &self.kripke.worlds()[0]
    }

    /// Occurrence-counted label multisets per depth, `ch^0 ..= ch^α`.
    pub fn children_sets(&self) -> Vec<Vec<Formula>> {
        let mut levels: Vec<Vec<Formula>> = vec![Vec::new(); self.tree.alpha + 1];
        for node in &self.tree.nodes {
            levels[node.depth].push(node.formula.clone());
        }
        levels
    }

    /// The hash-consed label of a world.
    pub fn formula_at(&self, w: &WorldId) -> Result<Formula> {
        let i = self
            .kripke
            .index_of(w)
            .ok_or_else(|| Error::UnknownWorld(w.to_string()))?;
        Ok(self.tree.nodes[i].formula.clone())
    }

    /// The Kripke model restricted to the non-reflexive tree relation.
    /// Finite labels cannot mention their own world, so label locality
    /// checks evaluate against this view.
    pub fn tree_kripke(&self) -> KripkeModel {
        let worlds = self.kripke.worlds().to_vec();
        let mut access = Vec::new();
        for node in &self.tree.nodes {
            for &c in &node.children {
                access.push((
                    WorldId::new(node.walk.clone()),
                    WorldId::new(self.tree.nodes[c].walk.clone()),
                ));
            }
        }
        let valuation: BTreeMap<String, Vec<String>> = self
            .tree
            .nodes
            .iter()
            .map(|n| (n.walk.clone(), vec![n.walk.clone()]))
            .collect();
        build_model(worlds, access, valuation, None).expect("mirror of a valid model")
    }

    /// DOT rendering of the stage model, self-loops included.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph unfolding {\n  rankdir=TB;\n");
        for node in &self.tree.nodes {
            out.push_str(&format!(
                "  {} [label={}];\n",
                dot_id(&node.walk),
                dot_id(&format!("{} : {}", node.walk, node.graph_node)),
            ));
        }
        for node in &self.tree.nodes {
            out.push_str(&format!(
                "  {} -> {};\n",
                dot_id(&node.walk),
                dot_id(&node.walk)
            ));
            for &c in &node.children {
                out.push_str(&format!(
                    "  {} -> {};\n",
                    dot_id(&node.walk),
                    dot_id(&self.tree.nodes[c].walk)
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON rendering of the tree: walk keys, depths, canonical formula text.
    pub fn to_json(&self) -> String {
        let mut out = format!(
            "{{\"alpha\":{},\"z_u\":{},\"nodes\":[",
            self.tree.alpha,
            self.z_u()
        );
        for (i, node) in self.tree.nodes.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let parent = match node.parent {
                None => "null".to_string(),
                Some(p) => json_string(&self.tree.nodes[p].walk),
            };
            out.push_str(&format!(
                "{{\"walk\":{},\"depth\":{},\"graph_node\":{},\"parent\":{},\"formula\":{}}}",
                json_string(&node.walk),
                node.depth,
                json_string(&node.graph_node),
                parent,
                json_string(&node.formula.to_string()),
            ));
        }
        out.push_str("]}\n");
        out
    }
}

/// Exact node count of the stage-α tree, saturating, without building it.
fn projected_node_count(seed: &SeedGraph, alpha: usize) -> u128 {
    let mut counts: BTreeMap<&str, u128> = BTreeMap::new();
    counts.insert(seed.root(), 1);
    let mut total: u128 = 1;
    for _ in 0..alpha {
        let mut next: BTreeMap<&str, u128> = BTreeMap::new();
        for (node, c) in &counts {
            for target in seed.members(node) {
                let slot = next.entry(target.as_str()).or_insert(0);
                *slot = slot.saturating_add(*c);
            }
        }
        if next.is_empty() {
            break;
        }
        for c in next.values() {
            total = total.saturating_add(*c);
        }
        counts = next;
    }
    total
}

/// Unfold `seed` to stage `alpha`.
pub fn unfold(seed: &SeedGraph, alpha: usize, limits: &UnfoldLimits) -> Result<StageModel> {
    if alpha > limits.depth_cap {
        return Err(Error::DepthCapExceeded {
            alpha,
            cap: limits.depth_cap,
        });
    }
    let projected = projected_node_count(seed, alpha);
    if projected > limits.node_cap as u128 {
        return Err(Error::NodeCapExceeded {
            projected,
            cap: limits.node_cap,
        });
    }

    // BFS expansion; children enumerate the outgoing edges per occurrence.
    struct Raw {
        walk: String,
        depth: usize,
        graph_node: String,
        parent: Option<usize>,
        children: Vec<usize>,
    }
    let mut raw = vec![Raw {
        walk: ROOT_KEY.to_string(),
        depth: 0,
        graph_node: seed.root().to_string(),
        parent: None,
        children: Vec::new(),
    }];
    let mut cursor = 0;
    while cursor < raw.len() {
        let (walk, depth, graph_node) = {
            let n = &raw[cursor];
            (n.walk.clone(), n.depth, n.graph_node.clone())
        };
        if depth < alpha {
            for (k, target) in seed.members(&graph_node).iter().enumerate() {
                let child = Raw {
                    walk: format!("{walk}/{k}"),
                    depth: depth + 1,
                    graph_node: target.clone(),
                    parent: Some(cursor),
                    children: Vec::new(),
                };
                raw.push(child);
                let idx = raw.len() - 1;
                raw[cursor].children.push(idx);
            }
        }
        cursor += 1;
    }

    // Labels bottom-up: atoms and truncated nodes carry their opaque
    // per-world atom, everything else is the triangle of its children set.
    let mut formulas: Vec<Option<Formula>> = vec![None; raw.len()];
    for i in (0..raw.len()).rev() {
        let node = &raw[i];
        let formula = if node.children.is_empty() {
            if seed.is_atom(&node.graph_node) || node.depth == alpha {
                Formula::atom(node.walk.clone())?
            } else {
                // a childless non-atom set unfolds as △∅
                triangle([])
            }
        } else {
            triangle(
                node.children
                    .iter()
                    .map(|&c| formulas[c].clone().expect("children labeled first")),
            )
        };
        formulas[i] = Some(formula);
    }

    let nodes: Vec<TreeNode> = raw
        .into_iter()
        .zip(formulas)
        .map(|(r, f)| TreeNode {
            walk: r.walk,
            depth: r.depth,
            graph_node: r.graph_node,
            parent: r.parent,
            children: r.children,
            formula: f.expect("all nodes labeled"),
        })
        .collect();

    let worlds: Vec<WorldId> = nodes.iter().map(|n| WorldId::new(n.walk.clone())).collect();
    let mut access = Vec::new();
    for node in &nodes {
        access.push((WorldId::new(node.walk.clone()), WorldId::new(node.walk.clone())));
        for &c in &node.children {
            access.push((
                WorldId::new(node.walk.clone()),
                WorldId::new(nodes[c].walk.clone()),
            ));
        }
    }
    let valuation: BTreeMap<String, Vec<String>> = nodes
        .iter()
        .map(|n| (n.walk.clone(), vec![n.walk.clone()]))
        .collect();
    let kripke = build_model(worlds, access, valuation, None)?;

    Ok(StageModel {
        tree: UnfoldTree { alpha, nodes },
        kripke,
    })
}
