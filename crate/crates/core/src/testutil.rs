//! Deterministic test helpers. Kept in the library tree (test-gated) so unit
//! tests and the acceptance suite share one generator.

/// xorshift64* generator; fixed seeds keep every test reproducible.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in `0..bound` (bound > 0).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Uniform in `[0,1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Random probability vector of the given length.
    pub fn simplex(&mut self, len: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..len).map(|_| self.unit() + 1e-3).collect();
        let sum: f64 = v.iter().sum();
        for x in &mut v {
            *x /= sum;
        }
        v
    }
}

/// Random labeled tree on `n` nodes as a parent table: node 0 is the root,
/// node i > 0 attaches to a uniform earlier node.
pub fn random_tree_parents(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut parents = vec![0usize; n];
    for (i, p) in parents.iter_mut().enumerate().skip(1) {
        *p = rng.below(i as u64) as usize;
    }
    parents
}

/// All-pairs path lengths of a parent-table tree, by per-node BFS over the
/// adjacency lists. Independent of the library's codeword or metric paths.
pub fn tree_distances(parents: &[usize]) -> Vec<Vec<u64>> {
    let n = parents.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &p) in parents.iter().enumerate().skip(1) {
        adj[i].push(p);
        adj[p].push(i);
    }
    let mut out = vec![vec![0u64; n]; n];
    for start in 0..n {
        let mut dist: Vec<Option<u64>> = vec![None; n];
        dist[start] = Some(0);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        for (j, d) in dist.into_iter().enumerate() {
            out[start][j] = d.expect("trees are connected");
        }
    }
    out
}

/// Characteristic-polynomial eigenvalue oracle for small symmetric matrices
/// (n ≤ 4): Faddeev-LeVerrier coefficients, then root extraction by
/// bracketed bisection with synthetic deflation down to the closed-form
/// quadratic. Entirely independent of the Jacobi path it cross-checks.
pub fn charpoly_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    assert!((1..=4).contains(&n), "oracle supports n <= 4");
    // coefficients of p(λ) = λ^n + c[0] λ^{n-1} + ... + c[n-1]
    let mut coeffs = vec![0.0f64; n];
    let mut m = rows.to_vec(); // M_1 = A
    let trace = |m: &Vec<Vec<f64>>| (0..n).map(|i| m[i][i]).sum::<f64>();
    let mut c = -trace(&m);
    coeffs[0] = c;
    for k in 2..=n {
        // M_k = A (M_{k-1} + c_{k-1} I)
        let mut shifted = m.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] += c;
        }
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| rows[i][l] * shifted[l][j]).sum();
            }
        }
        m = next;
        c = -trace(&m) / k as f64;
        coeffs[k - 1] = c;
    }

    // monic polynomial as descending coefficient list
    let poly: Vec<f64> = std::iter::once(1.0).chain(coeffs).collect();
    let mut roots = real_roots(&poly);
    for r in &mut roots {
        *r = polish_root(&poly, *r);
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Newton refinement against the original polynomial. Deflation can leave a
/// repeated root only half-accurate; a repeated root of p is a simple root
/// of p', so polish there when p' vanishes.
fn polish_root(poly: &[f64], mut r: f64) -> f64 {
    let deriv: Vec<f64> = {
        let n = poly.len() - 1;
        (0..n).map(|i| poly[i] * (n - i) as f64).collect()
    };
    let scale = 1.0 + poly.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if eval_poly(&deriv, r).abs() > 1e-6 * scale {
        for _ in 0..4 {
            let d = eval_poly(&deriv, r);
            if d == 0.0 {
                break;
            }
            r -= eval_poly(poly, r) / d;
        }
    } else if deriv.len() >= 2 {
        let second: Vec<f64> = {
            let n = deriv.len() - 1;
            (0..n).map(|i| deriv[i] * (n - i) as f64).collect()
        };
        for _ in 0..6 {
            let d = eval_poly(&second, r);
            if d == 0.0 {
                break;
            }
            r -= eval_poly(&deriv, r) / d;
        }
    }
    r
}

/// All real roots (with multiplicity) of a monic polynomial whose roots are
/// known to be real, small degree.
fn real_roots(poly: &[f64]) -> Vec<f64> {
    match poly.len() {
        0 | 1 => Vec::new(),
        2 => vec![-poly[1]],
        3 => {
            let (b, c) = (poly[1], poly[2]);
            let disc = (b * b - 4.0 * c).max(0.0).sqrt();
            vec![(-b - disc) / 2.0, (-b + disc) / 2.0]
        }
        _ => {
            let r = match bracketed_root(poly) {
                Some(r) => r,
                None => {
                    // even multiplicity everywhere: a root of p is among the
                    // roots of p', where |p| is smallest
                    let deriv = derivative_monic(poly);
                    let cands = real_roots(&deriv);
                    cands
                        .into_iter()
                        .min_by(|a, b| {
                            eval_poly(poly, *a)
                                .abs()
                                .partial_cmp(&eval_poly(poly, *b).abs())
                                .unwrap()
                        })
                        .expect("derivative of degree >= 3 polynomial has roots")
                }
            };
            let mut rest = real_roots(&deflate(poly, r));
            rest.push(r);
            rest
        }
    }
}

fn eval_poly(poly: &[f64], x: f64) -> f64 {
    poly.iter().fold(0.0, |acc, c| acc * x + c)
}

/// Monic derivative of a monic polynomial in descending coefficients.
fn derivative_monic(poly: &[f64]) -> Vec<f64> {
    let n = poly.len() - 1;
    (0..n)
        .map(|i| poly[i] * (n - i) as f64 / n as f64)
        .collect()
}

/// One real root found by sign-change scan plus bisection, or None when the
/// polynomial never changes sign on the root bound interval.
fn bracketed_root(poly: &[f64]) -> Option<f64> {
    let bound = 1.0 + poly.iter().skip(1).fold(0.0f64, |m, c| m.max(c.abs()));
    let steps = 20_000;
    let mut prev_x = -bound;
    let mut prev_v = eval_poly(poly, prev_x);
    for i in 1..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let v = eval_poly(poly, x);
        if prev_v == 0.0 {
            return Some(prev_x);
        }
        if prev_v * v <= 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let mut flo = prev_v;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = eval_poly(poly, mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_v = v;
    }
    None
}

/// Synthetic division of a monic polynomial by (λ − r).
fn deflate(poly: &[f64], r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(poly.len() - 1);
    let mut acc = 0.0;
    for &c in &poly[..poly.len() - 1] {
        acc = acc * r + c;
        out.push(acc);
    }
    out
}
