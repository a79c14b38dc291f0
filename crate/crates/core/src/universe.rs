//! The stage engine. A run starts from the one-dimensional base state and
//! advances through unfold → mirror → embed → decompose → select: the seed
//! is unfolded one stage deeper, the proximity mirror is verified bisimilar,
//! the tree codewords give the Euclidean distance matrix whose spectrum is
//! the new preferred basis, Born weights are taken against the included
//! previous state, and the eigenvector paired with the point world becomes
//! the next universe state.

use crate::bisim::{build_sigma, verify_bijective_bisimulation, SigmaModel};
use crate::embedding::{
    code_params, codewords, distance_matrix_d2, eigh, preferred_basis, CodeParams, EighOptions,
    PairingRule, PreferredBasis, Spectrum,
};
use crate::emit::{float17, json_string};
use crate::error::{Error, Result};
use crate::evidence::{bayes_posterior, belief_posterior, born_weights, generalized_born};
use crate::kripke::{KripkeModel, WorldId};
use crate::proximity::ProximitySpace;
use crate::seeds;
use crate::unfolding::{unfold, SeedGraph, StageModel, UnfoldLimits};

/// Options threaded through a run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub limits: UnfoldLimits,
    pub eigh: EighOptions,
    pub pairing: PairingRule,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            limits: UnfoldLimits::default(),
            eigh: EighOptions::default(),
            pairing: PairingRule::Positional,
        }
    }
}

/// Per-stage health flags and code parameters.
#[derive(Clone, Debug)]
pub struct StageDiagnostics {
    /// exactly one eigenvalue above the positive threshold (vacuous at N=1)
    pub schoenberg_ok: bool,
    /// no degeneracy flags: the spectrum is strictly ordered
    pub strict_ordering: bool,
    pub degenerate_pairs: Vec<(usize, usize)>,
    pub bisim_ok: bool,
    pub code: Option<CodeParams>,
    /// Σ |⟨Ψ_new, ι(ψ_old)⟩|² over the previous basis, when advancing
    pub likelihood_sum: Option<f64>,
}

/// The full state of one stage.
#[derive(Clone, Debug)]
pub struct StageState {
    pub alpha: usize,
    pub stage: StageModel,
    pub sigma: SigmaModel,
    pub basis: PreferredBasis,
    /// Ψ_α in world coordinates; always a column of the basis
    pub psi: Vec<f64>,
    /// the world paired with Ψ_α
    pub psi_world: WorldId,
    /// Born weights per world, canonical order
    pub born: Vec<f64>,
    pub diagnostics: StageDiagnostics,
}

impl StageState {
    pub fn dim(&self) -> usize {
        self.born.len()
    }

    /// The stage Kripke model carrying the Born weights as its weighting
    /// function.
    pub fn weighted_kripke(&self) -> KripkeModel {
        self.stage
            .kripke()
            .clone()
            .with_weights(normalized(&self.born))
            .expect("Born weights sum to one")
    }

    /// Proximity space of this stage: the stage tree with reflexive pairs.
    pub fn proximity(&self) -> ProximitySpace {
        let nodes = self.stage.tree().nodes();
        let carrier: Vec<String> = nodes.iter().map(|n| n.walk.clone()).collect();
        let mut pairs = Vec::new();
        for node in nodes {
            if let Some(p) = node.parent {
                pairs.push((nodes[p].walk.clone(), node.walk.clone()));
            }
        }
        ProximitySpace::new(carrier, pairs).expect("walk keys are unique")
    }
}

/// Rescale against accumulated rounding so the weight validation holds.
fn normalized(w: &[f64]) -> Vec<f64> {
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| x / sum).collect()
}

/// The base state: a one-dimensional register with the trivial basis, the
/// identity self-test, and Ψ₀ its only basis vector. Seed-independent; the
/// root walk of every unfolding extends it.
pub fn init_stage0() -> StageState {
    let seed = SeedGraph::new(["U"], [], "U", Vec::<&str>::new()).expect("static seed");
    init_stage0_with(&seed)
}

fn init_stage0_with(seed: &SeedGraph) -> StageState {
    let stage = unfold(seed, 0, &UnfoldLimits::default()).expect("stage 0 is one node");
    let sigma = build_sigma(&stage);
    let report = verify_bijective_bisimulation(stage.kripke(), sigma.plus(), sigma.pairing())
        .expect("mirror has equal size");
    let spectrum = Spectrum {
        eigenvalues: vec![1.0],
        vectors: vec![vec![1.0]],
        degenerate_pairs: vec![],
    };
    let basis = preferred_basis(stage.kripke().worlds(), spectrum, PairingRule::Positional)
        .expect("one world, one eigenvector");
    let psi_world = stage.point().clone();
    StageState {
        alpha: 0,
        stage,
        sigma,
        basis,
        psi: vec![1.0],
        psi_world,
        born: vec![1.0],
        diagnostics: StageDiagnostics {
            schoenberg_ok: true,
            strict_ordering: true,
            degenerate_pairs: vec![],
            bisim_ok: report.ok(),
            code: None,
            likelihood_sum: None,
        },
    }
}

/// Advance one stage. The seed must stay fixed across a run; the previous
/// stage's worlds must be a prefix of the new ones so the inclusion by zero
/// padding is well defined.
pub fn advance(state: &StageState, seed: &SeedGraph, opts: &RunOptions) -> Result<StageState> {
    let alpha = state.alpha + 1;
    let stage = unfold(seed, alpha, &opts.limits)?;

    let old_worlds = state.stage.kripke().worlds();
    let new_worlds = stage.kripke().worlds();
    if new_worlds.len() < old_worlds.len() || &new_worlds[..old_worlds.len()] != old_worlds {
        return Err(Error::InvalidPairing(
            "stage worlds do not extend the previous stage (seed changed mid-run?)".into(),
        ));
    }

    let sigma = build_sigma(&stage);
    let report = verify_bijective_bisimulation(stage.kripke(), sigma.plus(), sigma.pairing())?;

    let words = codewords(stage.tree());
    let code = code_params(&words).ok();
    let d2 = distance_matrix_d2(&words);
    if stage.z_u() <= 256 {
        // the codeword Hamming distances realize the Σ-side tree metric
        let d_t = sigma_tree_metric(&sigma)?;
        for i in 0..stage.z_u() {
            for j in 0..stage.z_u() {
                debug_assert_eq!(
                    crate::embedding::hamming(&words[i], &words[j]),
                    d_t[i][j]
                );
            }
        }
    }

    let spectrum = eigh(&d2, &opts.eigh)?;
    let n = spectrum.len();
    let radius = spectrum.spectral_radius();
    let positive = spectrum
        .eigenvalues
        .iter()
        .filter(|l| **l > 1e-9 * radius)
        .count();
    let schoenberg_ok = if n == 1 { true } else { positive == 1 };
    let strict_ordering = spectrum.degenerate_pairs.is_empty();
    let degenerate_pairs = spectrum.degenerate_pairs.clone();

    let basis = preferred_basis(stage.kripke().worlds(), spectrum, opts.pairing)?;
    let columns = basis.world_ordered_columns();
    let born = born_weights(&state.psi, &columns)?;

    // state selection: the eigenvector paired with the point world
    let psi = basis.vector_for_world(0).to_vec();
    let psi_world = stage.point().clone();

    let likelihood_sum = Some(
        (0..state.dim())
            .map(|i| {
                let old = state.basis.vector_for_world(i);
                let dot: f64 = old.iter().zip(&psi).map(|(a, b)| a * b).sum();
                dot * dot
            })
            .sum(),
    );

    Ok(StageState {
        alpha,
        stage,
        sigma,
        basis,
        psi,
        psi_world,
        born,
        diagnostics: StageDiagnostics {
            schoenberg_ok,
            strict_ordering,
            degenerate_pairs,
            bisim_ok: report.ok(),
            code,
            likelihood_sum,
        },
    })
}

fn sigma_tree_metric(sigma: &SigmaModel) -> Result<Vec<Vec<u64>>> {
    let k = sigma.kripke();
    let carrier: Vec<String> = k.worlds().iter().map(|w| w.to_string()).collect();
    let mut pairs = Vec::new();
    for (a, b) in k.access_pairs() {
        if a < b {
            pairs.push((carrier[a].clone(), carrier[b].clone()));
        }
    }
    ProximitySpace::new(carrier, pairs)?.tree_metric()
}

/// One line of a run trace.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub alpha: usize,
    pub n: usize,
    pub selected: WorldId,
    pub omega_selected: f64,
    pub omega: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub schoenberg_ok: bool,
    pub strict_ordering: bool,
    pub bisim_ok: bool,
}

impl StageRecord {
    pub fn from_state(state: &StageState) -> StageRecord {
        let point_pos = 0;
        StageRecord {
            alpha: state.alpha,
            n: state.dim(),
            selected: state.psi_world.clone(),
            omega_selected: state.born[point_pos],
            omega: state.born.clone(),
            eigenvalues: state.basis.spectrum().eigenvalues.clone(),
            schoenberg_ok: state.diagnostics.schoenberg_ok,
            strict_ordering: state.diagnostics.strict_ordering,
            bisim_ok: state.diagnostics.bisim_ok,
        }
    }

    pub fn to_json_line(&self) -> String {
        let omega: Vec<String> = self.omega.iter().map(|x| float17(*x)).collect();
        let eigen: Vec<String> = self.eigenvalues.iter().map(|x| float17(*x)).collect();
        format!(
            "{{\"alpha\":{},\"n\":{},\"selected\":{},\"omega_selected\":{},\"omega\":[{}],\"eigenvalues\":[{}],\"flags\":{{\"schoenberg_ok\":{},\"strict_ordering\":{},\"bisim_ok\":{}}}}}",
            self.alpha,
            self.n,
            json_string(self.selected.as_str()),
            float17(self.omega_selected),
            omega.join(","),
            eigen.join(","),
            self.schoenberg_ok,
            self.strict_ordering,
            self.bisim_ok,
        )
    }
}

/// A whole run: one record per stage, alphas strictly increasing from zero.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub records: Vec<StageRecord>,
}

impl RunTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json_line());
            out.push('\n');
        }
        out
    }
}

/// All stage states of a `stages`-step run, base state included.
pub fn run_states(seed: &SeedGraph, stages: usize, opts: &RunOptions) -> Result<Vec<StageState>> {
    let mut states = vec![init_stage0()];
    for _ in 0..stages {
        let next = advance(states.last().unwrap(), seed, opts)?;
        states.push(next);
    }
    Ok(states)
}

/// Run and collect the trace.
pub fn run(seed: &SeedGraph, stages: usize, opts: &RunOptions) -> Result<RunTrace> {
    let states = run_states(seed, stages, opts)?;
    Ok(RunTrace {
        records: states.iter().map(StageRecord::from_state).collect(),
    })
}

/// Forward report: Born weights and their belief-valued counterparts per
/// world of the current basis.
#[derive(Clone, Debug)]
pub struct PredictionReport {
    pub worlds: Vec<WorldId>,
    pub omega: Vec<f64>,
    pub p_star: Vec<f64>,
}

impl PredictionReport {
    pub fn to_json(&self) -> String {
        json_report(&[
            ("worlds", Field::Worlds(&self.worlds)),
            ("omega", Field::Floats(&self.omega)),
            ("p_star", Field::Floats(&self.p_star)),
        ])
    }
}

/// Backward report over the previous basis: likelihoods, Bayes posteriors,
/// and belief posteriors, plus the (possibly sub-normalized) likelihood sum.
#[derive(Clone, Debug)]
pub struct ExplanationReport {
    pub worlds: Vec<WorldId>,
    pub likelihood: Vec<f64>,
    pub bayes: Vec<f64>,
    pub belief: Vec<f64>,
    pub likelihood_sum: f64,
}

impl ExplanationReport {
    pub fn to_json(&self) -> String {
        let mut out = json_report(&[
            ("worlds", Field::Worlds(&self.worlds)),
            ("likelihood", Field::Floats(&self.likelihood)),
            ("bayes", Field::Floats(&self.bayes)),
            ("belief", Field::Floats(&self.belief)),
        ]);
        out.pop();
        out.pop();
        out.push_str(&format!(
            ",\"likelihood_sum\":{}}}\n",
            float17(self.likelihood_sum)
        ));
        out
    }
}

enum Field<'a> {
    Worlds(&'a [WorldId]),
    Floats(&'a [f64]),
}

fn json_report(fields: &[(&str, Field)]) -> String {
    let mut out = String::from("{");
    for (i, (name, field)) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{}:[", json_string(name)));
        match field {
            Field::Worlds(ws) => {
                for (j, w) in ws.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&json_string(w.as_str()));
                }
            }
            Field::Floats(xs) => {
                for (j, x) in xs.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&float17(*x));
                }
            }
        }
        out.push(']');
    }
    out.push_str("}\n");
    out
}

/// Prediction from a stage: ω per world plus the multi-valued Born value
/// over the stage proximity quanta.
pub fn predict(state: &StageState) -> Result<PredictionReport> {
    let space = state.proximity();
    let worlds = state.stage.kripke().worlds().to_vec();
    let p_star = worlds
        .iter()
        .map(|w| generalized_born(&space, &state.born, w.as_str()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PredictionReport {
        worlds,
        omega: state.born.clone(),
        p_star,
    })
}

/// Explanation of `state` in terms of the previous stage's basis.
pub fn explain(
    prev: &StageState,
    state: &StageState,
    prior: Option<&[f64]>,
) -> Result<ExplanationReport> {
    let n_old = prev.dim();
    if state.psi.len() < n_old {
        return Err(Error::DimensionMismatch {
            expected: n_old,
            got: state.psi.len(),
        });
    }
    let uniform = vec![1.0 / n_old as f64; n_old];
    let prior = match prior {
        Some(p) => {
            if p.len() != n_old {
                return Err(Error::DimensionMismatch {
                    expected: n_old,
                    got: p.len(),
                });
            }
            p.to_vec()
        }
        None => uniform,
    };
    let likelihood: Vec<f64> = (0..n_old)
        .map(|i| {
            let old = prev.basis.vector_for_world(i);
            let dot: f64 = old.iter().zip(&state.psi).map(|(a, b)| a * b).sum();
            dot * dot
        })
        .collect();
    let bayes: Vec<f64> = (0..n_old)
        .map(|i| bayes_posterior(&prior, &likelihood, i))
        .collect::<Result<_>>()?;
    let space = prev.proximity();
    let worlds = prev.stage.kripke().worlds().to_vec();
    let belief: Vec<f64> = worlds
        .iter()
        .map(|w| belief_posterior(&space, &bayes, w.as_str()))
        .collect::<Result<_>>()?;
    Ok(ExplanationReport {
        worlds,
        likelihood_sum: likelihood.iter().sum(),
        likelihood,
        bayes,
        belief,
    })
}

/// ω as JSON, worlds in canonical order.
pub fn omega_json(state: &StageState) -> String {
    let mut out = String::from("{\"omega\":[");
    for (i, (w, x)) in state
        .stage
        .kripke()
        .worlds()
        .iter()
        .zip(&state.born)
        .enumerate()
    {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "{{\"world\":{},\"value\":{}}}",
            json_string(w.as_str()),
            float17(*x)
        ));
    }
    out.push_str("]}\n");
    out
}

/// Stage diagnostics as JSON.
pub fn diagnostics_json(state: &StageState) -> String {
    let d = &state.diagnostics;
    let code = match &d.code {
        None => "null".to_string(),
        Some(c) => format!(
            "{{\"length\":{},\"count\":{},\"d_min\":{},\"e\":{},\"degenerate\":{}}}",
            c.length, c.count, c.d_min, c.e, c.degenerate
        ),
    };
    let likelihood = match d.likelihood_sum {
        None => "null".to_string(),
        Some(x) => float17(x),
    };
    let pairs: Vec<String> = d
        .degenerate_pairs
        .iter()
        .map(|(a, b)| format!("[{a},{b}]"))
        .collect();
    format!(
        "{{\"alpha\":{},\"n\":{},\"selected\":{},\"schoenberg_ok\":{},\"strict_ordering\":{},\"bisim_ok\":{},\"degenerate_pairs\":[{}],\"code\":{},\"likelihood_sum\":{}}}\n",
        state.alpha,
        state.dim(),
        json_string(state.psi_world.as_str()),
        d.schoenberg_ok,
        d.strict_ordering,
        d.bisim_ok,
        pairs.join(","),
        code,
        likelihood,
    )
}

/// Convenience corpus runner used by the verification suites.
pub fn corpus_runs(stages: usize) -> Vec<(String, Vec<StageState>)> {
    let opts = RunOptions::default();
    seeds::corpus()
        .into_iter()
        .map(|(name, seed)| {
            let states = run_states(&seed, stages, &opts).expect("corpus runs stay in caps");
            (name, states)
        })
        .collect()
}

/// Priors file format: a JSON array of numbers.
pub fn parse_prior_json(text: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = serde_json::from_str(text)?;
    Ok(v)
}

/// Vectors file format: a JSON array of number arrays.
pub fn parse_vectors_json(text: &str) -> Result<Vec<Vec<f64>>> {
    let v: Vec<Vec<f64>> = serde_json::from_str(text)?;
    Ok(v)
}
