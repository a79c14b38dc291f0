//! Bisimulation between finite Kripke models: greatest-fixpoint computation
//! by partition refinement, clause-by-clause verification of a proposed
//! bijective pairing, and the construction of the proximity-side mirror
//! model `M_Σ` from a stage model.

use std::collections::{BTreeMap, BTreeSet};

use crate::emit::{dot_id, json_string};
use crate::error::{Error, Result};
use crate::kripke::{build_model, KripkeModel, WorldId};
use crate::unfolding::StageModel;

/// Suffix distinguishing mirrored Σ-side world keys.
pub const SIGMA_SUFFIX: &str = "'";

/// A set of bisimilar world pairs across two models.
#[derive(Clone, Debug)]
pub struct Bisimulation {
    pub pairs: BTreeSet<(WorldId, WorldId)>,
}

/// How the valuation clause of the bisimulation definition is applied.
///
/// `Existential` follows the literal text: two worlds agree when each side's
/// label has *some* validating world in its model. Under singleton valuation
/// assignments every world validates its own label, so the clause never
/// discriminates and refinement is driven by edges alone. `StrictLabels` is
/// a diagnostic mode that partitions by exact valuation-set agreement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClauseA {
    Existential,
    StrictLabels,
}

fn has_validating_world(model: &KripkeModel, w: usize) -> bool {
    // some world whose valuation covers w's — trivially true via w itself
    (0..model.len()).any(|j| model.valuation_at(w).is_subset(model.valuation_at(j)))
}

/// Greatest bisimulation between `g` and `h`, computed as the coarsest
/// stable partition of the disjoint union under successor-block signatures.
pub fn max_bisimulation(g: &KripkeModel, h: &KripkeModel) -> Bisimulation {
    max_bisimulation_with(g, h, ClauseA::Existential)
}

pub fn max_bisimulation_with(g: &KripkeModel, h: &KripkeModel, mode: ClauseA) -> Bisimulation {
    let ng = g.len();
    let n = ng + h.len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            if i < ng {
                g.successors(i).to_vec()
            } else {
                h.successors(i - ng).iter().map(|&s| s + ng).collect()
            }
        })
        .collect();

    // initial partition per the valuation clause
    let mut block: Vec<usize> = match mode {
        ClauseA::Existential => {
            let mut groups: BTreeMap<bool, usize> = BTreeMap::new();
            (0..n)
                .map(|i| {
                    let flag = if i < ng {
                        has_validating_world(g, i)
                    } else {
                        has_validating_world(h, i - ng)
                    };
                    let next = groups.len();
                    *groups.entry(flag).or_insert(next)
                })
                .collect()
        }
        ClauseA::StrictLabels => {
            let mut groups: BTreeMap<BTreeSet<String>, usize> = BTreeMap::new();
            (0..n)
                .map(|i| {
                    let val = if i < ng {
                        g.valuation_at(i).clone()
                    } else {
                        h.valuation_at(i - ng).clone()
                    };
                    let next = groups.len();
                    *groups.entry(val).or_insert(next)
                })
                .collect()
        }
    };

    loop {
        let mut groups: BTreeMap<(usize, BTreeSet<usize>), usize> = BTreeMap::new();
        let mut next: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            let signature: BTreeSet<usize> = succ[i].iter().map(|&s| block[s]).collect();
            let fresh = groups.len();
            let id = *groups.entry((block[i], signature)).or_insert(fresh);
            next.push(id);
        }
        let stable = next == block;
        block = next;
        if stable {
            break;
        }
    }

    let mut pairs = BTreeSet::new();
    for i in 0..ng {
        for j in 0..h.len() {
            if block[i] == block[ng + j] {
                pairs.insert((g.worlds()[i].clone(), h.worlds()[j].clone()));
            }
        }
    }
    Bisimulation { pairs }
}

/// One clause violation found while verifying a pairing.
#[derive(Clone, Debug)]
pub struct Violation {
    pub left: WorldId,
    pub right: WorldId,
    pub clause: char,
    pub detail: String,
}

/// Result of verifying a bijective pairing between two models.
#[derive(Clone, Debug)]
pub struct BisimReport {
    pub pairing: Vec<(WorldId, WorldId)>,
    pub violations: Vec<Violation>,
}

impl BisimReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"pairs\":[");
        for (i, (a, b)) in self.pairing.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "[{},{}]",
                json_string(a.as_str()),
                json_string(b.as_str())
            ));
        }
        out.push_str("],\"violations\":[");
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"pair\":[{},{}],\"clause\":{},\"detail\":{}}}",
                json_string(v.left.as_str()),
                json_string(v.right.as_str()),
                json_string(&v.clause.to_string()),
                json_string(&v.detail)
            ));
        }
        out.push_str(&format!("],\"ok\":{}}}\n", self.ok()));
        out
    }
}

/// Check clauses (a), (b), (c) for every pair of a total injective pairing.
/// Success means the two models are bisimilar via exactly this pairing.
pub fn verify_bijective_bisimulation(
    g: &KripkeModel,
    h: &KripkeModel,
    pairing: &BTreeMap<WorldId, WorldId>,
) -> Result<BisimReport> {
    if g.len() != h.len() {
        return Err(Error::SizeMismatch {
            left: g.len(),
            right: h.len(),
        });
    }
    let mut forward: BTreeMap<usize, usize> = BTreeMap::new();
    let mut backward: BTreeMap<usize, usize> = BTreeMap::new();
    for (a, b) in pairing {
        let ia = g
            .index_of(a)
            .ok_or_else(|| Error::InvalidPairing(format!("unknown left world {a}")))?;
        let ib = h
            .index_of(b)
            .ok_or_else(|| Error::InvalidPairing(format!("unknown right world {b}")))?;
        if forward.insert(ia, ib).is_some() {
            return Err(Error::InvalidPairing(format!("{a} paired twice")));
        }
        if backward.insert(ib, ia).is_some() {
            return Err(Error::InvalidPairing(format!("{b} paired twice")));
        }
    }
    if forward.len() != g.len() {
        return Err(Error::InvalidPairing("pairing is not total".into()));
    }

    let mut violations = Vec::new();
    for (&ia, &ib) in &forward {
        let (a, b) = (&g.worlds()[ia], &h.worlds()[ib]);
        // (a): both labels have a validating world somewhere
        if has_validating_world(g, ia) != has_validating_world(h, ib) {
            violations.push(Violation {
                left: a.clone(),
                right: b.clone(),
                clause: 'a',
                detail: "validating-world flags disagree".into(),
            });
        }
        // (b): forward simulation along the pairing
        for &sa in g.successors(ia) {
            let sb = forward[&sa];
            if !h.has_edge(ib, sb) {
                violations.push(Violation {
                    left: a.clone(),
                    right: b.clone(),
                    clause: 'b',
                    detail: format!(
                        "edge {a} -> {} has no image {b} -> {}",
                        g.worlds()[sa],
                        h.worlds()[sb]
                    ),
                });
            }
        }
        // (c): backward simulation along the pairing
        for &sb in h.successors(ib) {
            let sa = backward[&sb];
            if !g.has_edge(ia, sa) {
                violations.push(Violation {
                    left: a.clone(),
                    right: b.clone(),
                    clause: 'c',
                    detail: format!(
                        "edge {b} -> {} has no preimage {a} -> {}",
                        h.worlds()[sb],
                        g.worlds()[sa]
                    ),
                });
            }
        }
    }
    let pairing_vec: Vec<(WorldId, WorldId)> = forward
        .iter()
        .map(|(&ia, &ib)| (g.worlds()[ia].clone(), h.worlds()[ib].clone()))
        .collect();
    Ok(BisimReport {
        pairing: pairing_vec,
        violations,
    })
}

/// The proximity-side mirror of a stage model. `plus` carries `⁺P` (the
/// image of the stage relation, reflexive pairs included), `minus` is the
/// inverse of its non-reflexive part, and the full model's relation is
/// `P_Σ = ⁺P ∪ ⁻P`, symmetric and reflexive.
#[derive(Clone, Debug)]
pub struct SigmaModel {
    kripke: KripkeModel,
    plus: KripkeModel,
    minus_pairs: BTreeSet<(WorldId, WorldId)>,
    pairing: BTreeMap<WorldId, WorldId>,
}

impl SigmaModel {
    /// The full proximity model: access is `P_Σ`.
    pub fn kripke(&self) -> &KripkeModel {
        &self.kripke
    }

    /// The `⁺P` orientation, bisimilar to the stage model.
    pub fn plus(&self) -> &KripkeModel {
        &self.plus
    }

    /// The non-reflexive `⁻P` pairs (child → parent).
    pub fn minus_pairs(&self) -> &BTreeSet<(WorldId, WorldId)> {
        &self.minus_pairs
    }

    /// Canonical bijection from stage worlds to Σ worlds.
    pub fn pairing(&self) -> &BTreeMap<WorldId, WorldId> {
        &self.pairing
    }

    /// Σ-side world key for a stage world key.
    pub fn mirror_key(key: &str) -> String {
        format!("{key}{SIGMA_SUFFIX}")
    }

    /// DOT rendering: `⁺P` edges solid, `⁻P` edges dashed, loops on every
    /// node.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph sigma {\n  rankdir=TB;\n");
        for w in self.plus.worlds() {
            out.push_str(&format!("  {};\n", dot_id(w.as_str())));
        }
        for (a, b) in self.plus.access_pairs() {
            out.push_str(&format!(
                "  {} -> {};\n",
                dot_id(self.plus.worlds()[a].as_str()),
                dot_id(self.plus.worlds()[b].as_str())
            ));
        }
        for (a, b) in &self.minus_pairs {
            out.push_str(&format!(
                "  {} -> {} [style=dashed];\n",
                dot_id(a.as_str()),
                dot_id(b.as_str())
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Mirror a stage model into its proximity-side model. The pairing maps each
/// walk key to its suffixed copy and is a bijective bisimulation between
/// `(W_U, R_U)` and `(W_Σ, ⁺P)` by construction.
pub fn build_sigma(stage: &StageModel) -> SigmaModel {
    let source = stage.kripke();
    let worlds: Vec<WorldId> = source
        .worlds()
        .iter()
        .map(|w| WorldId::new(SigmaModel::mirror_key(w.as_str())))
        .collect();

    let mut plus_access = Vec::new();
    let mut minus_pairs = BTreeSet::new();
    let mut full_access = Vec::new();
    for (a, b) in source.access_pairs() {
        let wa = worlds[a].clone();
        let wb = worlds[b].clone();
        plus_access.push((wa.clone(), wb.clone()));
        full_access.push((wa.clone(), wb.clone()));
        if a != b {
            minus_pairs.insert((wb.clone(), wa.clone()));
            full_access.push((wb, wa));
        }
    }

    let valuation: BTreeMap<String, Vec<String>> = worlds
        .iter()
        .map(|w| (w.to_string(), vec![w.to_string()]))
        .collect();

    let plus = build_model(worlds.clone(), plus_access, valuation.clone(), None)
        .expect("mirror of a valid model");
    let kripke =
        build_model(worlds.clone(), full_access, valuation, None).expect("mirror of a valid model");

    let pairing: BTreeMap<WorldId, WorldId> = source
        .worlds()
        .iter()
        .cloned()
        .zip(worlds)
        .collect();

    SigmaModel {
        kripke,
        plus,
        minus_pairs,
        pairing,
    }
}
