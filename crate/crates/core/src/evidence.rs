//! Dempster-Shafer kernel: basic probability assignments, belief and
//! plausibility, their modal representation over weighted SVA Kripke models,
//! Born weights, the belief-valued Born rule over proximity quanta, and the
//! Bayes/belief posteriors.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formula::{eval, Formula};
use crate::kripke::{check_sva, is_serial, subset_formula, KripkeModel};
use crate::proximity::ProximitySpace;

/// Mass normalization tolerance.
pub const MASS_SUM_TOL: f64 = 1e-12;
/// Orthonormality / unit-norm tolerance for Born inputs.
pub const BASIS_TOL: f64 = 1e-10;
/// Below this the Bayes normalizer counts as degenerate.
pub const NORMALIZER_TOL: f64 = 1e-12;

/// Basic probability assignment over an ordered frame. Only focal elements
/// (positive mass) are stored; the empty set carries no mass and the total
/// mass is one.
#[derive(Clone, Debug)]
pub struct Bpa {
    frame: Vec<String>,
    masses: BTreeMap<BTreeSet<String>, f64>,
}

impl Bpa {
    pub fn new(frame: Vec<String>, masses: BTreeMap<BTreeSet<String>, f64>) -> Result<Bpa> {
        let frame_set: BTreeSet<&str> = frame.iter().map(String::as_str).collect();
        if frame_set.len() != frame.len() {
            return Err(Error::InvalidBpa("duplicate frame tag".into()));
        }
        let mut kept = BTreeMap::new();
        let mut sum = 0.0;
        for (set, mass) in masses {
            if mass < 0.0 {
                return Err(Error::InvalidBpa(format!("negative mass {mass}")));
            }
            if set.is_empty() && mass > 0.0 {
                return Err(Error::InvalidBpa("positive mass on the empty set".into()));
            }
            for t in &set {
                if !frame_set.contains(t.as_str()) {
                    return Err(Error::TagOutsideFrame(t.clone()));
                }
            }
            sum += mass;
            if mass > 0.0 {
                *kept.entry(set).or_insert(0.0) += mass;
            }
        }
        if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidBpa(format!("total mass {sum}")));
        }
        Ok(Bpa {
            frame,
            masses: kept,
        })
    }

    /// Parse `{"frame":[...], "masses":[{"set":["x2"],"mass":0.4},...]}`.
    pub fn from_json(text: &str) -> Result<Bpa> {
        #[derive(Deserialize)]
        struct Entry {
            set: Vec<String>,
            mass: f64,
        }
        #[derive(Deserialize)]
        struct BpaJson {
            frame: Vec<String>,
            masses: Vec<Entry>,
        }
        let raw: BpaJson = serde_json::from_str(text)?;
        let mut masses = BTreeMap::new();
        for e in raw.masses {
            let set: BTreeSet<String> = e.set.into_iter().collect();
            *masses.entry(set).or_insert(0.0) += e.mass;
        }
        Bpa::new(raw.frame, masses)
    }

    pub fn frame(&self) -> &[String] {
        &self.frame
    }

    pub fn focal_elements(&self) -> impl Iterator<Item = (&BTreeSet<String>, f64)> {
        self.masses.iter().map(|(s, &m)| (s, m))
    }

    pub fn mass(&self, a: &BTreeSet<String>) -> f64 {
        self.masses.get(a).copied().unwrap_or(0.0)
    }

    fn check_subset(&self, a: &BTreeSet<String>) -> Result<()> {
        for t in a {
            if !self.frame.iter().any(|f| f == t) {
                return Err(Error::TagOutsideFrame(t.clone()));
            }
        }
        Ok(())
    }

    /// `Bel(A) = Σ_{B ⊆ A} m(B)`.
    pub fn bel(&self, a: &BTreeSet<String>) -> Result<f64> {
        self.check_subset(a)?;
        // fold from +0.0: the empty sum identity of `Iterator::sum` is -0.0
        Ok(self
            .masses
            .iter()
            .filter(|(set, _)| set.is_subset(a))
            .fold(0.0, |acc, (_, &m)| acc + m))
    }

    /// `Pl(A) = 1 − Bel(c(A))`.
    pub fn pl(&self, a: &BTreeSet<String>) -> Result<f64> {
        self.check_subset(a)?;
        let complement: BTreeSet<String> = self
            .frame
            .iter()
            .filter(|t| !a.contains(*t))
            .cloned()
            .collect();
        Ok(1.0 - self.bel(&complement)?)
    }
}

fn require_weighted_sva(model: &KripkeModel, frame: &[String]) -> Result<Vec<f64>> {
    for i in 0..model.len() {
        let hits = model
            .valuation_at(i)
            .iter()
            .filter(|t| frame.iter().any(|f| f == *t))
            .count();
        if hits != 1 {
            return Err(Error::SvaViolation(model.worlds()[i].to_string()));
        }
        if model.successors(i).is_empty() {
            return Err(Error::NonSerial(model.worlds()[i].to_string()));
        }
    }
    debug_assert!(check_sva(model, frame) && is_serial(model));
    model
        .weights()
        .map(<[f64]>::to_vec)
        .ok_or(Error::MissingWeights)
}

/// The unique frame tag validated at each world, in world order.
fn world_tags(model: &KripkeModel, frame: &[String]) -> Vec<String> {
    (0..model.len())
        .map(|i| {
            model
                .valuation_at(i)
                .iter()
                .find(|t| frame.iter().any(|f| f == *t))
                .expect("SVA checked")
                .clone()
        })
        .collect()
}

/// Basic probability assignment read off a weighted serial SVA model:
/// the mass of `A` accumulates the weight of every world whose successor
/// tag set is exactly `A`.
pub fn bpa_from_model(model: &KripkeModel, frame: &[String]) -> Result<Bpa> {
    let weights = require_weighted_sva(model, frame)?;
    let tags = world_tags(model, frame);
    let mut masses: BTreeMap<BTreeSet<String>, f64> = BTreeMap::new();
    for i in 0..model.len() {
        let set: BTreeSet<String> = model
            .successors(i)
            .iter()
            .map(|&j| tags[j].clone())
            .collect();
        *masses.entry(set).or_insert(0.0) += weights[i];
    }
    Bpa::new(frame.to_vec(), masses)
}

/// Modal belief: `Bel(A) = Σ_i ω_i v_i(□φ_A)`.
pub fn bel_modal(model: &KripkeModel, frame: &[String], a: &BTreeSet<String>) -> Result<f64> {
    modal_measure(model, frame, a, Formula::box_)
}

/// Modal plausibility: `Pl(A) = Σ_i ω_i v_i(◇φ_A)`.
pub fn pl_modal(model: &KripkeModel, frame: &[String], a: &BTreeSet<String>) -> Result<f64> {
    modal_measure(model, frame, a, Formula::diamond)
}

fn modal_measure(
    model: &KripkeModel,
    frame: &[String],
    a: &BTreeSet<String>,
    modality: fn(Formula) -> Formula,
) -> Result<f64> {
    let weights = require_weighted_sva(model, frame)?;
    let view = model
        .clone()
        .with_declared_atoms(frame.iter().cloned());
    let formula = modality(subset_formula(a, frame)?);
    let mut total = 0.0;
    for (i, w) in view.worlds().to_vec().iter().enumerate() {
        if eval(&view, w, &formula)? {
            total += weights[i];
        }
    }
    Ok(total)
}

/// Born weights of a fresh orthonormal basis against the previous state,
/// included by zero padding over the canonical world prefix:
/// `ω_k = |⟨basis_k, ι(ψ)⟩|²`.
pub fn born_weights(psi_prev: &[f64], basis: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = basis.len();
    if psi_prev.len() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi_prev.len(),
        });
    }
    for col in basis {
        if col.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: col.len(),
            });
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > BASIS_TOL {
                return Err(Error::NonOrthonormal(format!(
                    "⟨b{i},b{j}⟩ = {dot}"
                )));
            }
        }
    }
    let norm: f64 = psi_prev.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > BASIS_TOL {
        return Err(Error::NonUnitState(norm));
    }
    let weights: Vec<f64> = basis
        .iter()
        .map(|col| {
            let dot: f64 = col.iter().zip(psi_prev).map(|(a, b)| a * b).sum();
            dot * dot
        })
        .collect();
    debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    Ok(weights)
}

/// The quantum set used by the belief-valued rules: the union of all quanta
/// containing `psi`, i.e. the radius-2 ball around it.
fn enclosing_quantum_union(space: &ProximitySpace, psi: usize) -> BTreeSet<usize> {
    let mut q = BTreeSet::new();
    for x in 0..space.len() {
        if space.related(x, psi) {
            q.extend(space.quantum_of(&space.carrier()[x]).expect("in carrier"));
        }
    }
    q
}

/// Belief-valued Born rule: `P*(ψ | Ψ) = Σ_{ψ' ∈ Q} ω_{ψ'} = Bel(Q)` where
/// `Q` is the union of all quanta containing `ψ`.
pub fn generalized_born(space: &ProximitySpace, weights: &[f64], psi: &str) -> Result<f64> {
    if weights.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: weights.len(),
        });
    }
    let idx = space
        .index_of(psi)
        .ok_or_else(|| Error::UnknownElement(psi.to_string()))?;
    let q = enclosing_quantum_union(space, idx);
    Ok(q.iter().map(|&i| weights[i]).sum())
}

/// Bayes posterior with the two-term normalizer
/// `P(Ψ) = P(Ψ|ψ)P(ψ) + (1 − P(ψ)) Σ_{ψ'⊥ψ} P(Ψ|ψ')`.
/// `likelihoods[i]` is `|⟨Ψ_new, ι(ψ_i)⟩|²` over the old basis.
pub fn bayes_posterior(prior: &[f64], likelihoods: &[f64], target: usize) -> Result<f64> {
    if prior.len() != likelihoods.len() {
        return Err(Error::DimensionMismatch {
            expected: prior.len(),
            got: likelihoods.len(),
        });
    }
    if target >= prior.len() {
        return Err(Error::UnknownElement(format!("basis index {target}")));
    }
    let p = prior[target];
    let rest: f64 = likelihoods
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, &l)| l)
        .sum();
    let normalizer = likelihoods[target] * p + (1.0 - p) * rest;
    if normalizer <= NORMALIZER_TOL {
        return Err(Error::DegenerateNormalizer(normalizer));
    }
    Ok(likelihoods[target] * p / normalizer)
}

/// Belief posterior: the Bayes point posteriors summed over the quantum set
/// of `target` in the previous stage's proximity space.
pub fn belief_posterior(
    space: &ProximitySpace,
    posteriors: &[f64],
    target: &str,
) -> Result<f64> {
    generalized_born(space, posteriors, target)
}
