//! Codeword embedding and spectral decomposition. Tree nodes become binary
//! codewords over the edge set (bit e set iff edge e lies on the root path),
//! so Hamming distance realizes the tree metric exactly. The Euclidean
//! distance matrix of the codewords is the stage self-test; its eigenpairs,
//! computed by a built-in cyclic Jacobi sweep, form the preferred basis.
//!
//! The eigensolver is deliberately self-contained and single-threaded so
//! identical inputs give bit-identical spectra on every platform.

use crate::emit::float17;
use crate::error::{Error, Result};
use crate::kripke::WorldId;
use crate::unfolding::UnfoldTree;

/// Binary root-path indicator vector of one tree node.
#[derive(Clone, Debug)]
pub struct Codeword {
    pub owner: WorldId,
    pub bits: Vec<u8>,
}

/// Root-path codewords of every tree node, in canonical world order. A tree
/// with `N` nodes yields `N` words of length `N − 1`; the root is all-zero.
pub fn codewords(tree: &UnfoldTree) -> Vec<Codeword> {
    let n = tree.len();
    let mut words: Vec<Vec<u8>> = Vec::with_capacity(n);
    for (i, node) in tree.nodes().iter().enumerate() {
        let mut bits = match node.parent {
            None => vec![0u8; n.saturating_sub(1)],
            Some(p) => words[p].clone(),
        };
        if i > 0 {
            // edge k joins node k+1 to its parent
            bits[i - 1] = 1;
        }
        words.push(bits);
    }
    tree.nodes()
        .iter()
        .zip(words)
        .map(|(node, bits)| Codeword {
            owner: WorldId::new(node.walk.clone()),
            bits,
        })
        .collect()
}

/// Hamming distance between two codewords.
pub fn hamming(a: &Codeword, b: &Codeword) -> u64 {
    a.bits
        .iter()
        .zip(&b.bits)
        .filter(|(x, y)| x != y)
        .count() as u64
}

/// Squared Euclidean distance; exact in integer-valued floats for binary
/// words, where it coincides with the Hamming distance.
pub fn squared_l2(a: &Codeword, b: &Codeword) -> f64 {
    a.bits
        .iter()
        .zip(&b.bits)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

/// Block code parameters of a codeword family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParams {
    /// per-word length n
    pub length: usize,
    /// number of codewords N
    pub count: usize,
    /// minimum pairwise Hamming distance d_m
    pub d_min: u64,
    /// correction capability e = ⌊(d_m − 1)/2⌋
    pub e: u64,
    /// true when two codewords coincide (d_m = 0)
    pub degenerate: bool,
}

pub fn code_params(words: &[Codeword]) -> Result<CodeParams> {
    if words.len() < 2 {
        return Err(Error::TooFewWords);
    }
    let mut d_min = u64::MAX;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            d_min = d_min.min(hamming(&words[i], &words[j]));
        }
    }
    Ok(CodeParams {
        length: words[0].bits.len(),
        count: words.len(),
        d_min,
        e: if d_min == 0 { 0 } else { (d_min - 1) / 2 },
        degenerate: d_min == 0,
    })
}

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&float17(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Euclidean distance matrix of the codewords: entries `√Hamming(i,j)`,
/// which for binary words is exactly `‖x_i − x_j‖₂`.
pub fn distance_matrix_d2(words: &[Codeword]) -> Matrix {
    let n = words.len();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let d = (hamming(&words[i], &words[j]) as f64).sqrt();
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    m
}

/// Eigensolver options.
#[derive(Clone, Copy, Debug)]
pub struct EighOptions {
    /// adjacent eigenvalues within `eps_degenerate_rel · spectral radius`
    /// are flagged degenerate
    pub eps_degenerate_rel: f64,
    pub max_sweeps: usize,
}

impl Default for EighOptions {
    fn default() -> Self {
        EighOptions {
            eps_degenerate_rel: 1e-8,
            max_sweeps: 100,
        }
    }
}

/// Eigendecomposition of a symmetric matrix: eigenvalues descending,
/// orthonormal sign-normalized eigenvectors, and degeneracy flags.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `eigenvalues[k]`
    pub vectors: Vec<Vec<f64>>,
    /// adjacent index pairs whose eigenvalues are closer than the
    /// degeneracy threshold
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `Σ λ_k u_k u_kᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.len();
        let mut m = Matrix::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let v = m.get(i, j) + self.eigenvalues[k] * self.vectors[k][i] * self.vectors[k][j];
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,degenerate\n");
        let flagged: std::collections::BTreeSet<usize> = self
            .degenerate_pairs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect();
        for (i, l) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                i,
                float17(*l),
                flagged.contains(&i)
            ));
        }
        out
    }
}

fn sign_normalize(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 0.0 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("no NaN in eigenvectors") {
            std::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Cyclic Jacobi eigendecomposition. Sweeps run in a fixed (p,q) order and
/// the result is sorted by descending eigenvalue with a lexicographic
/// tie-break, eigenvectors sign-normalized (first component of largest
/// magnitude made positive). Nearly degenerate eigenspaces are
/// re-orthonormalized against the canonical axes so the returned basis does
/// not depend on rotation history.
pub fn eigh(matrix: &Matrix, opts: &EighOptions) -> Result<Spectrum> {
    let n = matrix.n();
    let scale = matrix.max_abs();
    for i in 0..n {
        for j in i + 1..n {
            if (matrix.get(i, j) - matrix.get(j, i)).abs() > 1e-12 * (1.0 + scale) {
                return Err(Error::NonSymmetric { i, j });
            }
        }
    }
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            vectors: vec![],
            degenerate_pairs: vec![],
        });
    }

    let mut a = matrix.clone();
    let mut v = Matrix::zeros(n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let frob: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j) * a.get(i, j))
        .sum::<f64>()
        .sqrt();
    let tol = 1e-14 * frob;

    let mut converged = n <= 1;
    for _ in 0..opts.max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a.get(p, q) * a.get(p, q))
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let tau = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(p, k, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                        a.set(q, k, s * akp + c * akq);
                    }
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(opts.max_sweeps));
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<f64> = (0..n).map(|i| v.get(i, k)).collect();
            sign_normalize(&mut col);
            (a.get(k, k), col)
        })
        .collect();
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("no NaN eigenvalues")
            .then_with(|| lex_cmp(&x.1, &y.1))
    });

    let radius = pairs.iter().fold(0.0f64, |m, (l, _)| m.max(l.abs()));
    let eps_deg = if radius > 0.0 {
        opts.eps_degenerate_rel * radius
    } else {
        opts.eps_degenerate_rel
    };
    let degenerate_pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1))
        .filter(|&i| (pairs[i].0 - pairs[i + 1].0).abs() <= eps_deg)
        .map(|i| (i, i + 1))
        .collect();

    // Re-orthonormalize true numerical eigenspaces deterministically. The
    // tighter grouping threshold matters: vectors of merely *near*-equal
    // eigenvalues must not be mixed, or the eigen residual degrades to the
    // eigenvalue gap.
    let eps_space = if radius > 0.0 { 1e-12 * radius } else { 0.0 };
    let mut group_start = 0;
    while group_start < n {
        let mut group_end = group_start;
        while group_end + 1 < n
            && (pairs[group_end].0 - pairs[group_end + 1].0).abs() <= eps_space
        {
            group_end += 1;
        }
        let size = group_end - group_start + 1;
        if size >= 2 {
            let members: Vec<usize> = (group_start..=group_end).collect();
            let fresh = canonical_eigenspace_basis(&pairs, &members, n);
            for (slot, vec) in members.iter().zip(fresh) {
                pairs[*slot].1 = vec;
            }
        }
        group_start = group_end + 1;
    }

    Ok(Spectrum {
        eigenvalues: pairs.iter().map(|(l, _)| *l).collect(),
        vectors: pairs.into_iter().map(|(_, v)| v).collect(),
        degenerate_pairs,
    })
}

/// Orthonormal basis of the span of the selected eigenvectors, built by
/// projecting the canonical axes and running pivoted Gram-Schmidt. Depends
/// only on the eigenspace, not on how Jacobi happened to rotate inside it.
fn canonical_eigenspace_basis(
    pairs: &[(f64, Vec<f64>)],
    members: &[usize],
    n: usize,
) -> Vec<Vec<f64>> {
    // residual projections of every canonical axis onto the eigenspace
    let mut residuals: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut r = vec![0.0; n];
            for &m in members {
                let coeff = pairs[m].1[j];
                for i in 0..n {
                    r[i] += coeff * pairs[m].1[i];
                }
            }
            r
        })
        .collect();
    let mut out = Vec::with_capacity(members.len());
    for _ in 0..members.len() {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(j, r)| (j, r.iter().map(|x| x * x).sum::<f64>().sqrt()))
            .fold((0usize, -1.0f64), |acc, (j, norm)| {
                if norm > acc.1 + 1e-15 {
                    (j, norm)
                } else {
                    acc
                }
            });
        let mut u: Vec<f64> = residuals[best].iter().map(|x| x / norm).collect();
        sign_normalize(&mut u);
        for r in &mut residuals {
            let dot: f64 = r.iter().zip(&u).map(|(a, b)| a * b).sum();
            for (x, y) in r.iter_mut().zip(&u) {
                *x -= dot * y;
            }
        }
        out.push(u);
    }
    out.sort_by(|a, b| lex_cmp(a, b));
    out
}

/// Rule pairing stage worlds with eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingRule {
    /// world at BFS position k ↔ eigenvector k (descending eigenvalue);
    /// the point world pairs with the top eigenvector
    Positional,
    /// each eigenvector in order claims the unassigned world where it has
    /// its largest magnitude component
    MaxComponent,
}

/// A stage basis: worlds in canonical order, the spectrum, and the
/// world → eigenvector assignment.
#[derive(Clone, Debug)]
pub struct PreferredBasis {
    worlds: Vec<WorldId>,
    spectrum: Spectrum,
    assignment: Vec<usize>,
}

pub fn preferred_basis(
    worlds: &[WorldId],
    spectrum: Spectrum,
    rule: PairingRule,
) -> Result<PreferredBasis> {
    if worlds.len() != spectrum.len() {
        return Err(Error::DimensionMismatch {
            expected: worlds.len(),
            got: spectrum.len(),
        });
    }
    let n = worlds.len();
    let assignment = match rule {
        PairingRule::Positional => (0..n).collect(),
        PairingRule::MaxComponent => {
            let mut assignment = vec![usize::MAX; n];
            let mut taken = vec![false; n];
            for k in 0..n {
                let mut best = usize::MAX;
                let mut best_mag = -1.0;
                for (i, &t) in taken.iter().enumerate() {
                    if !t && spectrum.vectors[k][i].abs() > best_mag {
                        best_mag = spectrum.vectors[k][i].abs();
                        best = i;
                    }
                }
                taken[best] = true;
                assignment[best] = k;
            }
            assignment
        }
    };
    Ok(PreferredBasis {
        worlds: worlds.to_vec(),
        spectrum,
        assignment,
    })
}

impl PreferredBasis {
    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Eigenvector index assigned to the world at the given position.
    pub fn eigenvector_index(&self, world_pos: usize) -> usize {
        self.assignment[world_pos]
    }

    pub fn vector_for_world(&self, world_pos: usize) -> &[f64] {
        &self.spectrum.vectors[self.assignment[world_pos]]
    }

    pub fn eigenvalue_for_world(&self, world_pos: usize) -> f64 {
        self.spectrum.eigenvalues[self.assignment[world_pos]]
    }

    /// Basis columns in world order (a permutation of the spectrum order).
    pub fn world_ordered_columns(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.vector_for_world(i).to_vec())
            .collect()
    }
}

/// Codeword dump: one 0/1 row per word.
pub fn codewords_text(words: &[Codeword]) -> String {
    let mut out = String::new();
    for w in words {
        for b in &w.bits {
            out.push(if *b == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use crate::testutil::{charpoly_eigenvalues, random_tree_parents, Rng};
    use crate::unfolding::{unfold, UnfoldLimits};

    fn chain3_words() -> Vec<Codeword> {
        let m = unfold(&seeds::chain(2), 2, &UnfoldLimits::default()).unwrap();
        codewords(m.tree())
    }

    #[test]
    fn codeword_examples() {
        let words = chain3_words();
        assert_eq!(words[0].bits, vec![0, 0]); // root is all-zero
        assert_eq!(words[1].bits, vec![1, 0]);
        assert_eq!(words[2].bits, vec![1, 1]);
        assert_eq!(hamming(&words[0], &words[2]), 2);

        let m = unfold(&seeds::star(2), 1, &UnfoldLimits::default()).unwrap();
        let star = codewords(m.tree());
        assert_eq!(star[1].bits, vec![1, 0]);
        assert_eq!(star[2].bits, vec![0, 1]);
        assert_eq!(hamming(&star[1], &star[2]), 2);
    }

    #[test]
    fn code_params_examples() {
        let words = chain3_words();
        let p = code_params(&words).unwrap();
        assert_eq!(p.length, 2);
        assert_eq!(p.count, 3);
        assert_eq!(p.d_min, 1);
        assert_eq!(p.e, 0);
        assert!(!p.degenerate);

        let twin = vec![
            Codeword {
                owner: WorldId::new("a"),
                bits: vec![1, 0],
            },
            Codeword {
                owner: WorldId::new("b"),
                bits: vec![1, 0],
            },
        ];
        let p = code_params(&twin).unwrap();
        assert_eq!(p.d_min, 0);
        assert!(p.degenerate);

        assert!(matches!(
            code_params(&twin[..1]),
            Err(Error::TooFewWords)
        ));
    }

    #[test]
    fn distance_matrix_examples() {
        let words = chain3_words();
        let d = distance_matrix_d2(&words);
        for i in 0..3 {
            assert_eq!(d.get(i, i), 0.0);
        }
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(1, 2), 1.0);
        assert_eq!(d.get(0, 2), 2f64.sqrt());
        // ‖x‖₂ ≤ ‖x‖₁ pointwise for the embedded binary words
        for w in &words {
            let l1: f64 = w.bits.iter().map(|&b| b as f64).sum();
            let l2: f64 = w.bits.iter().map(|&b| (b as f64) * (b as f64)).sum::<f64>().sqrt();
            assert!(l2 <= l1 + 1e-15);
        }
    }

    #[test]
    fn eigh_identity_is_fully_degenerate() {
        let mut m = Matrix::zeros(3);
        for i in 0..3 {
            m.set(i, i, 1.0);
        }
        let s = eigh(&m, &EighOptions::default()).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(s.degenerate_pairs, vec![(0, 1), (1, 2)]);
        // canonical-axis re-orthonormalization returns the axes themselves
        for k in 0..3 {
            let ones: usize = s.vectors[k].iter().filter(|x| **x == 1.0).count();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn eigh_two_by_two_closed_form() {
        let mut m = Matrix::zeros(2);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        let s = eigh(&m, &EighOptions::default()).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((s.vectors[0][0] - r).abs() < 1e-12 && (s.vectors[0][1] - r).abs() < 1e-12);
        assert!((s.vectors[1][0] - r).abs() < 1e-12 && (s.vectors[1][1] + r).abs() < 1e-12);
    }

    #[test]
    fn eigh_rejects_asymmetric_input() {
        let mut m = Matrix::zeros(2);
        m.set(0, 1, 1.0);
        assert!(matches!(
            eigh(&m, &EighOptions::default()),
            Err(Error::NonSymmetric { .. })
        ));
    }

    /// Chain-of-3 spectrum against the characteristic-polynomial oracle;
    /// −√2 is an exact root of λ³ − 4λ − 2√2.
    #[test]
    fn chain3_spectrum_matches_oracle() {
        let d = distance_matrix_d2(&chain3_words());
        let s = eigh(&d, &EighOptions::default()).unwrap();
        let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| d.get(i, j)).collect()).collect();
        let oracle = charpoly_eigenvalues(&rows);
        for (a, b) in s.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "jacobi {a} vs oracle {b}");
        }
        assert!((s.eigenvalues[2] + 2f64.sqrt()).abs() < 1e-12);
        let positive = s.eigenvalues.iter().filter(|l| **l > 1e-9 * s.spectral_radius()).count();
        assert_eq!(positive, 1);
    }

    #[test]
    fn eigh_invariants_on_random_trees() {
        let mut rng = Rng::new(0xfa_15e);
        for _ in 0..25 {
            let n = 2 + rng.below(24) as usize;
            let parents = random_tree_parents(&mut rng, n);
            let mut d = Matrix::zeros(n);
            // BFS distances through the explicit parent forest
            let dist = crate::testutil::tree_distances(&parents);
            for i in 0..n {
                for j in 0..n {
                    d.set(i, j, (dist[i][j] as f64).sqrt());
                }
            }
            let s = eigh(&d, &EighOptions::default()).unwrap();
            let radius = s.spectral_radius();
            // residual, orthonormality, reconstruction, trace
            for k in 0..n {
                let mv = d.mul_vec(&s.vectors[k]);
                for i in 0..n {
                    assert!(
                        (mv[i] - s.eigenvalues[k] * s.vectors[k][i]).abs() <= 1e-9 * radius,
                        "residual too large"
                    );
                }
            }
            for a in 0..n {
                for b in a..n {
                    let dot: f64 = s.vectors[a].iter().zip(&s.vectors[b]).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-10);
                }
            }
            let rec = s.reconstruct();
            for i in 0..n {
                for j in 0..n {
                    assert!((rec.get(i, j) - d.get(i, j)).abs() <= 1e-8 * radius);
                }
            }
            let trace: f64 = s.eigenvalues.iter().sum();
            assert!(trace.abs() <= 1e-9 * n as f64 * radius);
        }
    }

    #[test]
    fn preferred_basis_pairing() {
        let m = unfold(&seeds::chain(2), 2, &UnfoldLimits::default()).unwrap();
        let d = distance_matrix_d2(&codewords(m.tree()));
        let s = eigh(&d, &EighOptions::default()).unwrap();
        let b = preferred_basis(m.kripke().worlds(), s.clone(), PairingRule::Positional).unwrap();
        // the point world pairs with the top eigenvalue under the default rule
        assert_eq!(b.eigenvector_index(0), 0);
        assert_eq!(b.eigenvalue_for_world(0), b.spectrum().eigenvalues[0]);

        let b = preferred_basis(m.kripke().worlds(), s.clone(), PairingRule::MaxComponent).unwrap();
        let seen: std::collections::BTreeSet<usize> =
            (0..3).map(|i| b.eigenvector_index(i)).collect();
        assert_eq!(seen.len(), 3, "max-component pairing must be a bijection");

        assert!(preferred_basis(&m.kripke().worlds()[..2], s, PairingRule::Positional).is_err());

        // N = 1 base case: single world, identity spectrum
        let s1 = Spectrum {
            eigenvalues: vec![1.0],
            vectors: vec![vec![1.0]],
            degenerate_pairs: vec![],
        };
        let b = preferred_basis(&[WorldId::new("ε")], s1, PairingRule::Positional).unwrap();
        assert_eq!(b.vector_for_world(0), &[1.0]);
    }

    #[test]
    fn star_spectrum_is_degenerate_but_deterministic() {
        let m = unfold(&seeds::star(3), 1, &UnfoldLimits::default()).unwrap();
        let d = distance_matrix_d2(&codewords(m.tree()));
        let s1 = eigh(&d, &EighOptions::default()).unwrap();
        let s2 = eigh(&d, &EighOptions::default()).unwrap();
        assert!(!s1.degenerate_pairs.is_empty());
        assert_eq!(s1.eigenvalues, s2.eigenvalues);
        assert_eq!(s1.vectors, s2.vectors);
        // leaf-difference eigenspace carries −√2 twice
        let close: Vec<&f64> = s1
            .eigenvalues
            .iter()
            .filter(|l| (**l + 2f64.sqrt()).abs() < 1e-9)
            .collect();
        assert_eq!(close.len(), 2);
    }

    #[test]
    fn csv_emission() {
        let d = distance_matrix_d2(&chain3_words());
        let s = eigh(&d, &EighOptions::default()).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("index,eigenvalue,degenerate\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(d.to_csv().lines().count() == 3);
        assert_eq!(codewords_text(&chain3_words()), "00\n10\n11\n");
    }
}
