//! Proximity spaces: a reflexive, symmetric, not necessarily transitive
//! relation over a finite carrier. Quanta are closed neighborhoods, quantum
//! sets are unions of quanta, and together they carry the ortholattice
//! operations `∪_P`, `∩_P` and `⊥`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Deserialize;

use crate::error::{Error, Result};

/// Finite proximity space. The relation is stored as closed neighbor sets,
/// so reflexivity and symmetry hold by construction.
#[derive(Clone, Debug)]
pub struct ProximitySpace {
    carrier: Vec<String>,
    index: BTreeMap<String, usize>,
    neighbors: Vec<BTreeSet<usize>>,
}

/// A quantum set together with the generators witnessing it: `members` is
/// exactly the union of the quanta of `witness` elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumSet {
    pub members: BTreeSet<usize>,
    pub witness: BTreeSet<usize>,
}

impl QuantumSet {
    pub fn empty() -> Self {
        QuantumSet {
            members: BTreeSet::new(),
            witness: BTreeSet::new(),
        }
    }
}

impl ProximitySpace {
    /// Build from carrier ids and unordered related pairs. Reflexive pairs
    /// are implied and need not be listed.
    pub fn new<I, S, P>(carrier: I, pairs: P) -> Result<ProximitySpace>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (S, S)>,
    {
        let carrier: Vec<String> = carrier.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, x) in carrier.iter().enumerate() {
            if index.insert(x.clone(), i).is_some() {
                return Err(Error::UnknownElement(format!("duplicate element {x:?}")));
            }
        }
        let mut neighbors: Vec<BTreeSet<usize>> = (0..carrier.len())
            .map(|i| BTreeSet::from([i]))
            .collect();
        for (a, b) in pairs {
            let a = a.into();
            let b = b.into();
            let ia = *index.get(&a).ok_or(Error::UnknownElement(a))?;
            let ib = *index.get(&b).ok_or(Error::UnknownElement(b))?;
            neighbors[ia].insert(ib);
            neighbors[ib].insert(ia);
        }
        Ok(ProximitySpace {
            carrier,
            index,
            neighbors,
        })
    }

    /// Parse `{"carrier":[...], "pairs":[["a","b"],...]}`.
    pub fn from_json(text: &str) -> Result<ProximitySpace> {
        #[derive(Deserialize)]
        struct SpaceJson {
            carrier: Vec<String>,
            #[serde(default)]
            pairs: Vec<(String, String)>,
        }
        let s: SpaceJson = serde_json::from_str(text)?;
        ProximitySpace::new(s.carrier, s.pairs)
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].contains(&b)
    }

    /// The quantum `Q_x = {y : xPy}`; contains `x` by reflexivity.
    pub fn quantum_of(&self, x: &str) -> Result<BTreeSet<usize>> {
        let i = self
            .index_of(x)
            .ok_or_else(|| Error::UnknownElement(x.to_string()))?;
        Ok(self.neighbors[i].clone())
    }

    fn quantum_idx(&self, i: usize) -> &BTreeSet<usize> {
        &self.neighbors[i]
    }

    /// True iff `a` is a union of quanta; on success returns the witnesses
    /// (all x ∈ a with Q_x ⊆ a).
    pub fn is_quantum_set(&self, a: &BTreeSet<usize>) -> Option<QuantumSet> {
        let mut witness = BTreeSet::new();
        let mut covered = BTreeSet::new();
        for &x in a {
            if self.quantum_idx(x).is_subset(a) {
                witness.insert(x);
                covered.extend(self.quantum_idx(x).iter().copied());
            }
        }
        if covered == *a {
            Some(QuantumSet {
                members: a.clone(),
                witness,
            })
        } else {
            None
        }
    }

    /// Join `∪_P`: plain set union with merged witnesses.
    pub fn join_p(&self, q1: &QuantumSet, q2: &QuantumSet) -> QuantumSet {
        QuantumSet {
            members: q1.members.union(&q2.members).copied().collect(),
            witness: q1.witness.union(&q2.witness).copied().collect(),
        }
    }

    /// Meet `∩_P`: the union of all quanta inside the set intersection.
    /// Any quantum inside the intersection is generated by one of its own
    /// members, so scanning the intersection elements suffices.
    pub fn meet_p(&self, q1: &QuantumSet, q2: &QuantumSet) -> QuantumSet {
        let inter: BTreeSet<usize> = q1.members.intersection(&q2.members).copied().collect();
        let mut members = BTreeSet::new();
        let mut witness = BTreeSet::new();
        for &x in &inter {
            if self.quantum_idx(x).is_subset(&inter) {
                witness.insert(x);
                members.extend(self.quantum_idx(x).iter().copied());
            }
        }
        QuantumSet { members, witness }
    }

    /// Orthocomplement `⊥Q = {y | (∃x ∉ Q)(xPy)}`, the union of the quanta
    /// of all complement elements.
    pub fn ortho_p(&self, q: &QuantumSet) -> QuantumSet {
        let mut members = BTreeSet::new();
        let mut witness = BTreeSet::new();
        for x in 0..self.len() {
            if !q.members.contains(&x) {
                witness.insert(x);
                members.extend(self.quantum_idx(x).iter().copied());
            }
        }
        QuantumSet { members, witness }
    }

    /// Separation: disjoint and no quantum of one side meets the other.
    pub fn separated(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
        if a.intersection(b).next().is_some() {
            return false;
        }
        a.iter()
            .all(|&x| self.quantum_idx(x).intersection(b).next().is_none())
    }

    /// A shortest repetition-free P-chain from `x` to `y`, if the two are
    /// connected; `l(x,x) = 0` gives the one-element path.
    pub fn open_path(&self, x: &str, y: &str) -> Result<Option<Vec<String>>> {
        let sx = self
            .index_of(x)
            .ok_or_else(|| Error::UnknownElement(x.to_string()))?;
        let sy = self
            .index_of(y)
            .ok_or_else(|| Error::UnknownElement(y.to_string()))?;
        let mut prev: Vec<Option<usize>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([sx]);
        seen[sx] = true;
        while let Some(u) = queue.pop_front() {
            if u == sy {
                let mut path = vec![sy];
                let mut cur = sy;
                while let Some(p) = prev[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Ok(Some(
                    path.into_iter().map(|i| self.carrier[i].clone()).collect(),
                ));
            }
            for &v in self.quantum_idx(u) {
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        Ok(None)
    }

    /// Undirected non-reflexive edges of the relation.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for &b in self.quantum_idx(a) {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Path-length matrix of a tree-shaped space. The non-reflexive part of
    /// the relation must be a tree (connected, |edges| = n−1).
    pub fn tree_metric(&self) -> Result<Vec<Vec<u64>>> {
        let n = self.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let edges = self.edges();
        if edges.len() + 1 != n {
            return Err(Error::NotATree(format!(
                "{} nodes need {} edges, found {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut matrix = vec![vec![0u64; n]; n];
        for start in 0..n {
            let mut dist: Vec<Option<u64>> = vec![None; n];
            dist[start] = Some(0);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in self.quantum_idx(u) {
                    if dist[v].is_none() {
                        dist[v] = Some(dist[u].unwrap() + 1);
                        queue.push_back(v);
                    }
                }
            }
            for (j, d) in dist.into_iter().enumerate() {
                matrix[start][j] = d.ok_or_else(|| Error::NotATree("disconnected".into()))?;
            }
        }
        Ok(matrix)
    }

    /// Every quantum set of the space, for small carriers only.
    pub fn all_quantum_sets(&self, cap: usize) -> Result<Vec<QuantumSet>> {
        let n = self.len();
        if n > cap {
            return Err(Error::CarrierTooLarge { size: n, cap });
        }
        let mut out = Vec::new();
        for mask in 0u64..(1 << n) {
            let set: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if let Some(q) = self.is_quantum_set(&set) {
                out.push(q);
            }
        }
        Ok(out)
    }

    pub fn names(&self, set: &BTreeSet<usize>) -> Vec<String> {
        set.iter().map(|&i| self.carrier[i].clone()).collect()
    }
}

/// Proximity induced by experimental indistinguishability of eigenvalues:
/// `xPy` iff `|λ_x − λ_y| ≤ epsilon`.
pub fn proximity_from_spectrum(eigenvalues: &[f64], epsilon: f64) -> ProximitySpace {
    let carrier: Vec<String> = (0..eigenvalues.len()).map(|i| i.to_string()).collect();
    let mut pairs = Vec::new();
    for i in 0..eigenvalues.len() {
        for j in i + 1..eigenvalues.len() {
            if (eigenvalues[i] - eigenvalues[j]).abs() <= epsilon {
                pairs.push((i.to_string(), j.to_string()));
            }
        }
    }
    ProximitySpace::new(carrier, pairs).expect("indices are unique")
}

/// Proximity induced by non-orthogonality: `sPt` iff `|⟨s,t⟩| > zero_tol`.
pub fn proximity_from_inner_products(
    vectors: &[Vec<f64>],
    zero_tol: f64,
) -> Result<ProximitySpace> {
    for (i, v) in vectors.iter().enumerate() {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2.sqrt() <= zero_tol {
            return Err(Error::ZeroVector(i));
        }
    }
    let carrier: Vec<String> = (0..vectors.len()).map(|i| i.to_string()).collect();
    let mut pairs = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let dot: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| a * b)
                .sum();
            if dot.abs() > zero_tol {
                pairs.push((i.to_string(), j.to_string()));
            }
        }
    }
    ProximitySpace::new(carrier, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> ProximitySpace {
        ProximitySpace::new(["1", "2", "3"], [("1", "2"), ("2", "3")]).unwrap()
    }

    fn set(space: &ProximitySpace, ids: &[&str]) -> BTreeSet<usize> {
        ids.iter().map(|s| space.index_of(s).unwrap()).collect()
    }

    #[test]
    fn quantum_of_examples() {
        let lone = ProximitySpace::new(["x"], []).unwrap();
        assert_eq!(lone.quantum_of("x").unwrap(), BTreeSet::from([0]));

        let p = path3();
        assert_eq!(p.quantum_of("2").unwrap(), set(&p, &["1", "2", "3"]));
        assert_eq!(p.quantum_of("1").unwrap(), set(&p, &["1", "2"]));
        assert!(p.quantum_of("9").is_err());
    }

    #[test]
    fn is_quantum_set_examples() {
        let p = path3();
        assert!(p.is_quantum_set(&BTreeSet::new()).is_some());
        assert!(p.is_quantum_set(&set(&p, &["1", "2"])).is_some());
        assert!(p.is_quantum_set(&set(&p, &["2"])).is_none());
        assert!(p.is_quantum_set(&set(&p, &["1", "2", "3"])).is_some());
    }

    #[test]
    fn lattice_op_examples() {
        let p = path3();
        let q1 = p.is_quantum_set(&set(&p, &["1", "2"])).unwrap();
        let q3 = p.is_quantum_set(&set(&p, &["2", "3"])).unwrap();
        let empty = QuantumSet::empty();

        assert_eq!(p.join_p(&q1, &empty).members, q1.members);
        assert_eq!(p.join_p(&q1, &q3).members, set(&p, &["1", "2", "3"]));
        assert_eq!(p.join_p(&q1, &q1).members, q1.members);

        // Q_1 ∩_P Q_3: the set intersection {2} contains no quantum
        assert!(p.meet_p(&q1, &q3).members.is_empty());
        assert_eq!(p.meet_p(&q1, &q1).members, q1.members);
        let top = p.is_quantum_set(&set(&p, &["1", "2", "3"])).unwrap();
        assert_eq!(p.meet_p(&q1, &top).members, q1.members);

        // ⊥∅ = X, ⊥X = ∅, and the worked path case ⊥{1,2} = Q_3
        assert_eq!(p.ortho_p(&empty).members, set(&p, &["1", "2", "3"]));
        assert!(p.ortho_p(&top).members.is_empty());
        assert_eq!(p.ortho_p(&q1).members, set(&p, &["2", "3"]));

        // discrete relation: ⊥ is the plain complement
        let discrete = ProximitySpace::new(["a", "b", "c"], []).unwrap();
        let qa = discrete.is_quantum_set(&set(&discrete, &["a"])).unwrap();
        assert_eq!(discrete.ortho_p(&qa).members, set(&discrete, &["b", "c"]));
    }

    #[test]
    fn separated_examples() {
        let two = ProximitySpace::new(["a", "b"], []).unwrap();
        assert!(two.separated(&set(&two, &["a"]), &set(&two, &["b"])));

        let p = path3();
        assert!(!p.separated(&set(&p, &["1"]), &set(&p, &["2"])));
        assert!(p.separated(&set(&p, &["1"]), &BTreeSet::new()));
        // {1} and {3} are separated even though a path links them:
        // Q_1 ∩ {3} = ∅ and Q_3 ∩ {1} = ∅
        assert!(p.separated(&set(&p, &["1"]), &set(&p, &["3"])));
    }

    #[test]
    fn open_path_examples() {
        let p = path3();
        assert_eq!(p.open_path("1", "1").unwrap().unwrap(), vec!["1"]);
        assert_eq!(
            p.open_path("1", "3").unwrap().unwrap(),
            vec!["1", "2", "3"]
        );
        let split = ProximitySpace::new(["a", "b"], []).unwrap();
        assert!(split.open_path("a", "b").unwrap().is_none());
    }

    #[test]
    fn tree_metric_examples() {
        let chain = ProximitySpace::new(["r", "a", "b"], [("r", "a"), ("a", "b")]).unwrap();
        let d = chain.tree_metric().unwrap();
        for i in 0..3 {
            assert_eq!(d[i][i], 0);
        }
        assert_eq!(d[0][2], 2);

        let star = ProximitySpace::new(["c", "x", "y"], [("c", "x"), ("c", "y")]).unwrap();
        let d = star.tree_metric().unwrap();
        assert_eq!(d[1][2], 2);
        assert_eq!(d[0][1], 1);

        let cycle =
            ProximitySpace::new(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")]).unwrap();
        assert!(cycle.tree_metric().is_err());
        let split = ProximitySpace::new(["a", "b", "c"], [("a", "b")]).unwrap();
        assert!(split.tree_metric().is_err());
    }

    #[test]
    fn tree_metric_axioms() {
        use crate::testutil::{random_tree_parents, Rng};
        let mut rng = Rng::new(0x7e_e7);
        for trial in 0..8 {
            let n = if trial == 0 { 256 } else { 2 + rng.below(9) as usize };
            let parents = random_tree_parents(&mut rng, n);
            let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let pairs: Vec<(String, String)> = (1..n)
                .map(|i| (ids[parents[i]].clone(), ids[i].clone()))
                .collect();
            let space = ProximitySpace::new(ids, pairs).unwrap();
            let d = space.tree_metric().unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(d[i][j], d[j][i]);
                    assert_eq!(d[i][j] == 0, i == j);
                }
            }
            // triangle inequality: exhaustive for small carriers, sampled
            // for the 256-node case
            if n <= 10 {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            assert!(d[i][k] <= d[i][j] + d[j][k]);
                        }
                    }
                }
            } else {
                for _ in 0..20_000 {
                    let i = rng.below(n as u64) as usize;
                    let j = rng.below(n as u64) as usize;
                    let k = rng.below(n as u64) as usize;
                    assert!(d[i][k] <= d[i][j] + d[j][k]);
                }
            }
        }
    }

    #[test]
    fn spectrum_proximity_examples() {
        let discrete = proximity_from_spectrum(&[1.0, 2.0, 4.0], 0.0);
        assert_eq!(discrete.edges().len(), 0);

        // the weight-comparison chain: A = B, B = C, A < C
        let poincare = proximity_from_spectrum(&[10.0, 11.0, 12.0], 1.0);
        assert!(poincare.related(0, 1));
        assert!(poincare.related(1, 2));
        assert!(!poincare.related(0, 2));

        let complete = proximity_from_spectrum(&[3.0, 3.0, 3.0], 0.0);
        assert_eq!(complete.edges().len(), 3);
    }

    #[test]
    fn inner_product_proximity_examples() {
        let ortho = proximity_from_inner_products(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            1e-12,
        )
        .unwrap();
        assert_eq!(ortho.edges().len(), 0);

        let chain = proximity_from_inner_products(
            &[vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            1e-12,
        )
        .unwrap();
        assert!(chain.related(0, 1));
        assert!(chain.related(1, 2));
        assert!(!chain.related(0, 2));

        let single = proximity_from_inner_products(&[vec![2.0]], 1e-12).unwrap();
        assert!(single.related(0, 0));

        assert!(matches!(
            proximity_from_inner_products(&[vec![0.0, 0.0]], 1e-12),
            Err(Error::ZeroVector(0))
        ));
    }
}
