//! Finite Kripke structures: an ordered world set, an accessibility relation,
//! per-world valuations, and an optional weighting function over worlds.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formula::Formula;

/// Stable world key. For unfolding trees this is the walk key.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WorldId(String);

impl WorldId {
    pub fn new(s: impl Into<String>) -> Self {
        WorldId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WorldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for WorldId {
    fn from(s: &str) -> Self {
        WorldId(s.to_string())
    }
}

/// Tolerance for the weight normalization check.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// An immutable finite Kripke model. Worlds keep their construction order,
/// which is the canonical order used everywhere downstream.
#[derive(Clone, Debug)]
pub struct KripkeModel {
    worlds: Vec<WorldId>,
    index: HashMap<WorldId, usize>,
    access: BTreeSet<(usize, usize)>,
    successors: Vec<Vec<usize>>,
    valuation: Vec<BTreeSet<String>>,
    weights: Option<Vec<f64>>,
    atoms: BTreeSet<String>,
}

/// Validating constructor. Rejects duplicate worlds, dangling references and
/// weightings that are out of range or do not sum to one.
pub fn build_model(
    worlds: Vec<WorldId>,
    access: Vec<(WorldId, WorldId)>,
    valuation: BTreeMap<String, Vec<String>>,
    weights: Option<BTreeMap<String, f64>>,
) -> Result<KripkeModel> {
    let mut index = HashMap::new();
    for (i, w) in worlds.iter().enumerate() {
        if index.insert(w.clone(), i).is_some() {
            return Err(Error::DuplicateWorld(w.to_string()));
        }
    }
    let mut pairs = BTreeSet::new();
    for (a, b) in &access {
        let ia = *index
            .get(a)
            .ok_or_else(|| Error::DanglingWorld(a.to_string()))?;
        let ib = *index
            .get(b)
            .ok_or_else(|| Error::DanglingWorld(b.to_string()))?;
        pairs.insert((ia, ib));
    }
    let mut val = vec![BTreeSet::new(); worlds.len()];
    let mut atoms = BTreeSet::new();
    for (w, tags) in &valuation {
        let i = *index
            .get(&WorldId::new(w.clone()))
            .ok_or_else(|| Error::DanglingWorld(w.clone()))?;
        for t in tags {
            val[i].insert(t.clone());
            atoms.insert(t.clone());
        }
    }
    let weights = match weights {
        None => None,
        Some(map) => {
            let mut ws = Vec::with_capacity(worlds.len());
            for w in &worlds {
                let v = *map
                    .get(w.as_str())
                    .ok_or_else(|| Error::MissingWeight(w.to_string()))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::WeightRange {
                        world: w.to_string(),
                        value: v,
                    });
                }
                ws.push(v);
            }
            for w in map.keys() {
                if !index.contains_key(&WorldId::new(w.clone())) {
                    return Err(Error::DanglingWorld(w.clone()));
                }
            }
            let sum: f64 = ws.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::WeightSum(sum));
            }
            Some(ws)
        }
    };
    let mut successors = vec![Vec::new(); worlds.len()];
    for &(a, b) in &pairs {
        successors[a].push(b);
    }
    Ok(KripkeModel {
        worlds,
        index,
        access: pairs,
        successors,
        valuation: val,
        weights,
        atoms,
    })
}

impl KripkeModel {
    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn index_of(&self, w: &WorldId) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn access_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.access.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.access.contains(&(a, b))
    }

    pub fn valuation_at(&self, i: usize) -> &BTreeSet<String> {
        &self.valuation[i]
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn has_atom(&self, tag: &str) -> bool {
        self.atoms.contains(tag)
    }

    /// Dense relation matrix, derived on demand.
    pub fn access_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut m = vec![vec![false; n]; n];
        for &(a, b) in &self.access {
            m[a][b] = true;
        }
        m
    }

    /// Declare extra atom tags (for formulas over frames larger than the
    /// valuation range). Construction-time builder; models stay immutable
    /// once shared.
    pub fn with_declared_atoms<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for t in tags {
            self.atoms.insert(t.into());
        }
        self
    }

    /// Attach a weighting function by canonical world order.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: weights.len(),
            });
        }
        for (i, &v) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::WeightRange {
                    world: self.worlds[i].to_string(),
                    value: v,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum(sum));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Parse the model file format:
    /// `{"worlds":[...], "access":[["w1","w2"],...], "valuation":{"w1":["p1"]},
    ///   "weights":{"w1":0.5,...}}`
    pub fn from_json(text: &str) -> Result<KripkeModel> {
        #[derive(Deserialize)]
        struct ModelJson {
            worlds: Vec<String>,
            #[serde(default)]
            access: Vec<(String, String)>,
            #[serde(default)]
            valuation: BTreeMap<String, Vec<String>>,
            #[serde(default)]
            weights: Option<BTreeMap<String, f64>>,
        }
        let m: ModelJson = serde_json::from_str(text)?;
        build_model(
            m.worlds.into_iter().map(WorldId::new).collect(),
            m.access
                .into_iter()
                .map(|(a, b)| (WorldId::new(a), WorldId::new(b)))
                .collect(),
            m.valuation,
            m.weights,
        )
    }
}

/// True iff every world validates exactly one tag of `frame`.
pub fn check_sva(model: &KripkeModel, frame: &[String]) -> bool {
    let frame: BTreeSet<&str> = frame.iter().map(String::as_str).collect();
    (0..model.len()).all(|i| {
        model
            .valuation_at(i)
            .iter()
            .filter(|t| frame.contains(t.as_str()))
            .count()
            == 1
    })
}

/// `φ_A`: the disjunction of singleton atoms for nonempty `a`, and the
/// conjunction of negated atoms over the whole frame for `a = ∅`.
pub fn subset_formula(a: &BTreeSet<String>, frame: &[String]) -> Result<Formula> {
    let frame_set: BTreeSet<&str> = frame.iter().map(String::as_str).collect();
    for t in a {
        if !frame_set.contains(t.as_str()) {
            return Err(Error::TagOutsideFrame(t.clone()));
        }
    }
    if a.is_empty() {
        let members = frame
            .iter()
            .map(|t| Ok(Formula::not(Formula::atom(t.clone())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Formula::conj(members))
    } else {
        let members = a
            .iter()
            .map(|t| Formula::atom(t.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Formula::disj(members))
    }
}

/// True iff every world has at least one successor.
pub fn is_serial(model: &KripkeModel) -> bool {
    (0..model.len()).all(|i| !model.successors(i).is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval, render, Formula};

    fn w(s: &str) -> WorldId {
        WorldId::new(s)
    }

    #[test]
    fn build_model_examples() {
        // one world, empty relation, empty valuation
        let m = build_model(vec![w("w1")], vec![], BTreeMap::new(), None).unwrap();
        assert_eq!(m.len(), 1);

        // dangling world reference
        let err = build_model(
            vec![w("w1")],
            vec![(w("w1"), w("w2"))],
            BTreeMap::new(),
            None,
        );
        assert!(matches!(err, Err(Error::DanglingWorld(_))));

        // weight sum violation
        let weights: BTreeMap<String, f64> =
            [("w1".to_string(), 0.6), ("w2".to_string(), 0.5)].into();
        let err = build_model(
            vec![w("w1"), w("w2")],
            vec![],
            BTreeMap::new(),
            Some(weights),
        );
        assert!(matches!(err, Err(Error::WeightSum(_))));
    }

    #[test]
    fn json_round_trip_shape() {
        let text = r#"{"worlds":["w1","w2"],
                       "access":[["w1","w2"]],
                       "valuation":{"w1":["p1"],"w2":["p2"]},
                       "weights":{"w1":0.5,"w2":0.5}}"#;
        let m = KripkeModel::from_json(text).unwrap();
        assert_eq!(m.worlds().len(), 2);
        assert_eq!(m.weights().unwrap(), &[0.5, 0.5]);
        assert!(m.has_edge(0, 1));
        assert!(KripkeModel::from_json("{\"worlds\": [1]}").is_err());
    }

    fn sva_model(vals: &[&[&str]]) -> KripkeModel {
        let worlds: Vec<WorldId> = (0..vals.len()).map(|i| w(&format!("w{i}"))).collect();
        let valuation: BTreeMap<String, Vec<String>> = worlds
            .iter()
            .zip(vals)
            .map(|(w, ts)| (w.to_string(), ts.iter().map(|s| s.to_string()).collect()))
            .collect();
        build_model(worlds, vec![], valuation, None).unwrap()
    }

    #[test]
    fn check_sva_examples() {
        let frame = vec!["p1".to_string(), "p2".to_string()];
        assert!(check_sva(&sva_model(&[&["p1"], &["p2"]]), &frame));
        assert!(!check_sva(&sva_model(&[&["p1", "p2"], &["p2"]]), &frame));
        // "one and only one": the empty valuation fails
        assert!(!check_sva(&sva_model(&[&[], &["p2"]]), &frame));
    }

    #[test]
    fn subset_formula_examples() {
        let frame = vec!["x1".to_string(), "x2".to_string()];
        let single: BTreeSet<String> = ["x1".to_string()].into();
        assert_eq!(render(&subset_formula(&single, &frame).unwrap()), "atom:x1");

        let empty = BTreeSet::new();
        assert_eq!(
            render(&subset_formula(&empty, &frame).unwrap()),
            "/\\{~atom:x1,~atom:x2}"
        );

        let both: BTreeSet<String> = ["x1".to_string(), "x2".to_string()].into();
        assert_eq!(
            render(&subset_formula(&both, &frame).unwrap()),
            "\\/{atom:x1,atom:x2}"
        );

        let outside: BTreeSet<String> = ["y".to_string()].into();
        assert!(subset_formula(&outside, &frame).is_err());
    }

    #[test]
    fn is_serial_examples() {
        let mk = |edges: Vec<(&str, &str)>| {
            build_model(
                vec![w("w1"), w("w2")],
                edges.into_iter().map(|(a, b)| (w(a), w(b))).collect(),
                BTreeMap::new(),
                None,
            )
            .unwrap()
        };
        assert!(is_serial(&mk(vec![("w1", "w1"), ("w2", "w2")])));
        assert!(!is_serial(&mk(vec![("w2", "w2")])));
        // chain with a loop only at the end, enumerated successors
        assert!(is_serial(&mk(vec![("w1", "w2"), ("w2", "w2")])));
    }

    #[test]
    fn sva_world_validates_its_own_atom() {
        let frame = vec!["p1".to_string(), "p2".to_string()];
        let m = sva_model(&[&["p1"], &["p2"]]);
        assert!(check_sva(&m, &frame));
        for (i, tag) in frame.iter().enumerate() {
            for (j, world) in m.worlds().to_vec().iter().enumerate() {
                let v = eval(&m, world, &Formula::atom(tag.clone()).unwrap()).unwrap();
                assert_eq!(v, i == j);
            }
        }
    }
}
