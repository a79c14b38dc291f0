//! A library of example seed graphs: the worked four-atom seed, von Neumann
//! ordinals, chains, stars, cycles and self-referential shapes. `corpus()`
//! collects them for the cross-cutting test suites.

use crate::unfolding::SeedGraph;

/// The worked example `U = {a1, {a2}, {a3, {a4}}}` with four named atoms.
pub fn fig1() -> SeedGraph {
    SeedGraph::new(
        ["u", "n1", "n2", "n3", "a1", "a2", "a3", "a4"],
        [
            ("u", "a1"),
            ("u", "n1"),
            ("u", "n2"),
            ("n1", "a2"),
            ("n2", "a3"),
            ("n2", "n3"),
            ("n3", "a4"),
        ],
        "u",
        ["a1", "a2", "a3", "a4"],
    )
    .expect("static seed")
}

/// The von Neumann ordinal `n` as a pointed graph over nodes `0..=n` with
/// `i → j` for `j < i`; `0` is the empty set, the only atom.
pub fn von_neumann(n: usize) -> SeedGraph {
    let nodes: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 0..i {
            edges.push((i.to_string(), j.to_string()));
        }
    }
    SeedGraph::new(nodes, edges, n.to_string(), ["0".to_string()]).expect("static seed")
}

///`r → n1 → … → atom`, `len` edges long.
pub fn chain(len: usize) -> SeedGraph {
    assert!(len >= 1);
    let mut nodes = vec!["r".to_string()];
    let mut edges = Vec::new();
    let mut prev = "r".to_string();
    for i in 1..len {
        let id = format!("n{i}");
        edges.push((prev.clone(), id.clone()));
        nodes.push(id.clone());
        prev = id;
    }
    edges.push((prev, "a".to_string()));
    nodes.push("a".to_string());
    SeedGraph::new(nodes, edges, "r".to_string(), ["a".to_string()]).expect("static seed")
}

/// Root with a single atom member.
pub fn single_atom() -> SeedGraph {
    chain(1)
}

/// Root with `k` atom members.
pub fn star(k: usize) -> SeedGraph {
    let mut nodes = vec!["c".to_string()];
    let mut edges = Vec::new();
    let mut atoms = Vec::new();
    for i in 0..k {
        let id = format!("x{i}");
        edges.push(("c".to_string(), id.clone()));
        nodes.push(id.clone());
        atoms.push(id);
    }
    SeedGraph::new(nodes, edges, "c".to_string(), atoms).expect("static seed")
}

/// A directed cycle of `k` non-atom nodes; unfolds into one walk per depth.
pub fn cycle(k: usize) -> SeedGraph {
    assert!(k >= 1);
    let nodes: Vec<String> = (0..k).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String)> = (0..k)
        .map(|i| (format!("v{i}"), format!("v{}", (i + 1) % k)))
        .collect();
    SeedGraph::new(nodes, edges, "v0".to_string(), Vec::<String>::new()).expect("static seed")
}

/// Non-wellfounded root: `u ∈ u` next to one atom member.
pub fn self_loop_root() -> SeedGraph {
    SeedGraph::new(["u", "a"], [("u", "u"), ("u", "a")], "u", ["a"]).expect("static seed")
}

/// An atom decorated with a self-loop; the loop carries no structure.
pub fn self_loop_atom() -> SeedGraph {
    SeedGraph::new(["r", "a"], [("r", "a"), ("a", "a")], "r", ["a"]).expect("static seed")
}

/// Root whose only member is itself.
pub fn bouquet() -> SeedGraph {
    SeedGraph::new(["u"], [("u", "u")], "u", Vec::<&str>::new()).expect("static seed")
}

/// Full binary tree of the given depth with atoms at the leaves.
pub fn binary(depth: usize) -> SeedGraph {
    let mut nodes = vec!["b".to_string()];
    let mut edges = Vec::new();
    let mut atoms = Vec::new();
    fn grow(
        id: &str,
        level: usize,
        depth: usize,
        nodes: &mut Vec<String>,
        edges: &mut Vec<(String, String)>,
        atoms: &mut Vec<String>,
    ) {
        for side in ["l", "r"] {
            let child = format!("{id}{side}");
            nodes.push(child.clone());
            edges.push((id.to_string(), child.clone()));
            if level + 1 == depth {
                atoms.push(child);
            } else {
                grow(&child, level + 1, depth, nodes, edges, atoms);
            }
        }
    }
    grow("b", 0, depth, &mut nodes, &mut edges, &mut atoms);
    SeedGraph::new(nodes, edges, "b".to_string(), atoms).expect("static seed")
}

/// A reconverging shape: two paths share the node above the atom, so its
/// subtree unfolds once per occurrence.
pub fn diamond() -> SeedGraph {
    SeedGraph::new(
        ["u", "x", "y", "m", "z"],
        [("u", "x"), ("u", "y"), ("x", "m"), ("y", "m"), ("m", "z")],
        "u",
        ["z"],
    )
    .expect("static seed")
}

/// A spine with one atom hanging off each segment.
pub fn caterpillar() -> SeedGraph {
    SeedGraph::new(
        ["s1", "s2", "s3", "h1", "h2", "h3"],
        [
            ("s1", "h1"),
            ("s1", "s2"),
            ("s2", "h2"),
            ("s2", "s3"),
            ("s3", "h3"),
        ],
        "s1",
        ["h1", "h2", "h3"],
    )
    .expect("static seed")
}

/// A root with no members at all: `Z_U` stays 1 forever.
pub fn isolated_root() -> SeedGraph {
    SeedGraph::new(["u"], [], "u", Vec::<&str>::new()).expect("static seed")
}

/// Root over a childless non-atom member, which unfolds as `△∅`.
pub fn empty_nonatom() -> SeedGraph {
    SeedGraph::new(["u", "e"], [("u", "e")], "u", Vec::<&str>::new()).expect("static seed")
}

/// Two-node cycle with an atom hanging off each node.
pub fn mixed_cycle() -> SeedGraph {
    SeedGraph::new(
        ["u", "v", "a1", "a2"],
        [("u", "a1"), ("u", "v"), ("v", "a2"), ("v", "u")],
        "u",
        ["a1", "a2"],
    )
    .expect("static seed")
}

/// The standing corpus used by the cross-module suites: at least twenty
/// seeds, including cyclic and self-loop shapes.
pub fn corpus() -> Vec<(String, SeedGraph)> {
    let mut out: Vec<(String, SeedGraph)> = vec![
        ("fig1".into(), fig1()),
        ("von_neumann_1".into(), von_neumann(1)),
        ("von_neumann_2".into(), von_neumann(2)),
        ("von_neumann_3".into(), von_neumann(3)),
        ("von_neumann_4".into(), von_neumann(4)),
        ("single_atom".into(), single_atom()),
        ("chain_2".into(), chain(2)),
        ("chain_3".into(), chain(3)),
        ("chain_5".into(), chain(5)),
        ("chain_8".into(), chain(8)),
        ("star_2".into(), star(2)),
        ("star_3".into(), star(3)),
        ("star_5".into(), star(5)),
        ("star_6".into(), star(6)),
        ("cycle_2".into(), cycle(2)),
        ("cycle_3".into(), cycle(3)),
        ("cycle_5".into(), cycle(5)),
        ("self_loop_root".into(), self_loop_root()),
        ("self_loop_atom".into(), self_loop_atom()),
        ("bouquet".into(), bouquet()),
        ("binary_2".into(), binary(2)),
        ("binary_3".into(), binary(3)),
        ("diamond".into(), diamond()),
        ("caterpillar".into(), caterpillar()),
        ("isolated_root".into(), isolated_root()),
        ("empty_nonatom".into(), empty_nonatom()),
        ("mixed_cycle".into(), mixed_cycle()),
    ];
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
