//! Labeled seeds, matrix mutation, generalized mutation and exchange-graph
//! exploration up to seed permutation.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use itertools::Itertools;
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{ExpVector, LaurentPoly};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeMatrix {
    pub b: Vec<Vec<i64>>,
    pub r: Vec<i64>,
}

impl ExchangeMatrix {
    pub fn new(b: Vec<Vec<i64>>, r: Vec<i64>) -> Result<Self> {
        let m = ExchangeMatrix { b, r };
        m.validate()?;
        Ok(m)
    }

    pub fn rank(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.b.len();
        if self.r.len() != n {
            return Err(Error::Dimension { expected: n, found: self.r.len() });
        }
        if let Some(row) = self.b.iter().find(|row| row.len() != n) {
            return Err(Error::Dimension { expected: n, found: row.len() });
        }
        if let Some(&bad) = self.r.iter().find(|&&r| r <= 0) {
            return Err(Error::InvalidMatrix(format!("divisor {bad} is not positive")));
        }
        for j in 0..n {
            for i in 0..n {
                if self.b[i][j] % self.r[j] != 0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({},{}) = {} not divisible by r_{} = {}",
                        i + 1,
                        j + 1,
                        self.b[i][j],
                        j + 1,
                        self.r[j]
                    )));
                }
            }
        }
        self.skew_symmetrizer().map(|_| ())
    }

    /// Positive integer diagonal D with DB skew-symmetric.
    pub fn skew_symmetrizer(&self) -> Result<Vec<i64>> {
        let n = self.b.len();
        for i in 0..n {
            if self.b[i][i] != 0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal entry at {}", i + 1)));
            }
            for j in 0..n {
                let (a, c) = (self.b[i][j], self.b[j][i]);
                if (a == 0) != (c == 0) || (a != 0 && a.signum() == c.signum()) {
                    return Err(Error::InvalidMatrix(format!("not sign-skew at ({},{})", i + 1, j + 1)));
                }
            }
        }
        // d as reduced fractions num/den, propagated over connected components.
        let mut d: Vec<Option<(i64, i64)>> = vec![None; n];
        for start in 0..n {
            if d[start].is_some() {
                continue;
            }
            d[start] = Some((1, 1));
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                let (pi, qi) = d[i].unwrap();
                for j in 0..n {
                    if self.b[i][j] == 0 {
                        continue;
                    }
                    // d_i b_ij = -d_j b_ji
                    let num = pi * self.b[i][j];
                    let den = -qi * self.b[j][i];
                    let g = num_integer::gcd(num, den);
                    let (num, den) = if den / g < 0 { (-num / g, -den / g) } else { (num / g, den / g) };
                    match d[j] {
                        None => {
                            d[j] = Some((num, den));
                            stack.push(j);
                        }
                        Some((pj, qj)) => {
                            if pj * den != num * qj {
                                return Err(Error::InvalidMatrix("not skew-symmetrizable".into()));
                            }
                        }
                    }
                }
            }
        }
        let lcm = d.iter().fold(1i64, |acc, x| num_integer::lcm(acc, x.unwrap().1));
        Ok(d.iter().map(|x| x.unwrap().0 * lcm / x.unwrap().1).collect())
    }

    /// Entry of B̄ = (b_ij / r_j).
    pub fn bbar(&self, i: usize, j: usize) -> i64 {
        self.b[i][j] / self.r[j]
    }

    pub fn mutate(&self, k: usize) -> Result<ExchangeMatrix> {
        let n = self.rank();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        let mut b = self.b.clone();
        for i in 0..n {
            for j in 0..n {
                b[i][j] = if i == k || j == k {
                    -self.b[i][j]
                } else {
                    let (bik, bkj) = (self.b[i][k], self.b[k][j]);
                    self.b[i][j] + bik.signum() * (bik * bkj).max(0)
                };
            }
        }
        Ok(ExchangeMatrix { b, r: self.r.clone() })
    }

    /// Simultaneous permutation: new index i holds old index perm[i].
    pub fn permuted(&self, perm: &[usize]) -> ExchangeMatrix {
        let b = perm.iter().map(|&pi| perm.iter().map(|&pj| self.b[pi][pj]).collect()).collect();
        let r = perm.iter().map(|&p| self.r[p]).collect();
        ExchangeMatrix { b, r }
    }
}

/// Exponent vector of ŷ_j = ∏ x_i^{b_ij / r_j}.
pub fn hat_y_exponent(m: &ExchangeMatrix, j: usize) -> Result<ExpVector> {
    let n = m.rank();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    Ok(ExpVector((0..n).map(|i| m.bbar(i, j) as i32).collect()))
}

pub fn hat_y(m: &ExchangeMatrix, j: usize) -> Result<LaurentPoly> {
    Ok(LaurentPoly::monomial(hat_y_exponent(m, j)?, BigInt::from(1)))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaCoeffs(pub Vec<Vec<u64>>);

impl ThetaCoeffs {
    pub fn all_ones(r: &[i64]) -> Self {
        ThetaCoeffs(r.iter().map(|&ri| vec![1; ri as usize + 1]).collect())
    }

    pub fn validate(&self, r: &[i64]) -> Result<()> {
        if self.0.len() != r.len() {
            return Err(Error::Dimension { expected: r.len(), found: self.0.len() });
        }
        for (i, (c, &ri)) in self.0.iter().zip(r).enumerate() {
            if c.len() != ri as usize + 1 {
                return Err(Error::InvalidTheta(format!("index {} needs {} coefficients", i + 1, ri + 1)));
            }
            if c[0] != 1 || c[c.len() - 1] != 1 {
                return Err(Error::InvalidTheta(format!("index {} is not monic", i + 1)));
            }
            if c.iter().ne(c.iter().rev()) {
                return Err(Error::InvalidTheta(format!("index {} is not palindromic", i + 1)));
            }
        }
        Ok(())
    }

    pub fn permuted(&self, perm: &[usize]) -> ThetaCoeffs {
        ThetaCoeffs(perm.iter().map(|&p| self.0[p].clone()).collect())
    }

    /// θ_k(u, v) = Σ_ℓ c_{k,ℓ} u^ℓ v^{r_k - ℓ}.
    pub fn eval(&self, k: usize, u: &LaurentPoly, v: &LaurentPoly) -> LaurentPoly {
        let c = &self.0[k];
        let rk = c.len() - 1;
        let mut out = LaurentPoly::zero(u.nvars());
        for (l, &cl) in c.iter().enumerate() {
            if cl == 0 {
                continue;
            }
            let t = &u.pow(l as u32) * &v.pow((rk - l) as u32);
            out = &out + &t.scale(&BigInt::from(cl));
        }
        out
    }
}

/// Rendered cluster, flattened B, divisors.
type SortKey = (Vec<String>, Vec<i64>, Vec<i64>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenSeed {
    pub cluster: Vec<LaurentPoly>,
    pub matrix: ExchangeMatrix,
    pub theta: ThetaCoeffs,
}

impl GenSeed {
    pub fn initial(matrix: ExchangeMatrix) -> Result<Self> {
        let theta = ThetaCoeffs::all_ones(&matrix.r);
        Self::with_theta(matrix, theta)
    }

    pub fn with_theta(matrix: ExchangeMatrix, theta: ThetaCoeffs) -> Result<Self> {
        matrix.validate()?;
        theta.validate(&matrix.r)?;
        let n = matrix.rank();
        let cluster = (0..n).map(|i| LaurentPoly::var(n, i)).collect();
        Ok(GenSeed { cluster, matrix, theta })
    }

    pub fn rank(&self) -> usize {
        self.cluster.len()
    }

    /// Generalized mutation: x_k x_k' = θ_k(∏ x_j^{[b̄_jk]_+}, ∏ x_j^{[-b̄_jk]_+}).
    pub fn mutate(&self, k: usize) -> Result<GenSeed> {
        let n = self.rank();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        let nx = self.cluster[0].nvars();
        let mut u = LaurentPoly::one(nx);
        let mut v = LaurentPoly::one(nx);
        for j in 0..n {
            let e = self.matrix.bbar(j, k);
            if e > 0 {
                u = &u * &self.cluster[j].pow(e as u32);
            } else if e < 0 {
                v = &v * &self.cluster[j].pow((-e) as u32);
            }
        }
        let rhs = self.theta.eval(k, &u, &v);
        let xk = rhs.divexact(&self.cluster[k])?;
        let mut cluster = self.cluster.clone();
        cluster[k] = xk;
        Ok(GenSeed { cluster, matrix: self.matrix.mutate(k)?, theta: self.theta.clone() })
    }

    pub fn mutate_path(&self, path: &[usize]) -> Result<GenSeed> {
        path.iter().try_fold(self.clone(), |s, &k| s.mutate(k))
    }

    pub fn permuted(&self, perm: &[usize]) -> GenSeed {
        GenSeed {
            cluster: perm.iter().map(|&p| self.cluster[p].clone()).collect(),
            matrix: self.matrix.permuted(perm),
            theta: self.theta.permuted(perm),
        }
    }

    fn sort_key(&self, rendered: &[String]) -> SortKey {
        let flat = self.matrix.b.iter().flatten().copied().collect();
        (rendered.to_vec(), flat, self.matrix.r.clone())
    }

    /// Least representative over simultaneous permutations, and the
    /// permutation achieving it (new index i holds old index perm[i]).
    pub fn canonical_form(&self) -> Result<(GenSeed, Vec<usize>)> {
        let n = self.rank();
        if n > 12 {
            return Err(Error::InvalidMatrix(format!("rank {n} exceeds canonicalization limit 12")));
        }
        let rendered: Vec<String> = self.cluster.iter().map(|p| p.render("x")).collect();
        // The cluster strings dominate the order, so only permutations that
        // sort them are candidates; ties are resolved by brute force.
        let sorted: Vec<usize> = (0..n).sorted_by(|&a, &b| rendered[a].cmp(&rendered[b])).collect();
        let groups: Vec<Vec<usize>> =
            sorted.iter().copied().group_by(|&i| rendered[i].clone()).into_iter().map(|(_, g)| g.collect()).collect();
        let mut best: Option<(SortKey, Vec<usize>)> = None;
        let choices = groups
            .iter()
            .map(|g| g.iter().copied().permutations(g.len()).collect::<Vec<_>>())
            .multi_cartesian_product();
        for choice in choices {
            let perm: Vec<usize> = choice.into_iter().flatten().collect();
            let cand = self.permuted(&perm);
            let r: Vec<String> = perm.iter().map(|&p| rendered[p].clone()).collect();
            let key = cand.sort_key(&r);
            if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                best = Some((key, perm));
            }
        }
        let perm = best.map(|(_, p)| p).unwrap_or_default();
        Ok((self.permuted(&perm), perm))
    }

    /// String key of the unlabeled seed; equal keys iff equal canonical forms.
    pub fn canonical_key(&self) -> Result<String> {
        let (c, _) = self.canonical_form()?;
        Ok(c.key_string())
    }

    fn key_string(&self) -> String {
        let mut s = self.cluster.iter().map(|p| p.render("x")).join(" | ");
        write!(s, " || {:?} {:?} {:?}", self.matrix.b, self.matrix.r, self.theta.0).unwrap();
        s
    }
}

#[derive(Clone, Debug)]
pub struct SeedNode {
    pub seed: GenSeed,
    pub key: String,
    pub depth: usize,
}

/// Undirected edge; `ka`/`kb` are the exchanged positions in the canonical
/// labelings of the endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedEdge {
    pub a: usize,
    pub ka: usize,
    pub b: usize,
    pub kb: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ExchangeGraph {
    pub nodes: Vec<SeedNode>,
    pub edges: Vec<SeedEdge>,
}

impl ExchangeGraph {
    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.key == key)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph exchange {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label = n.seed.cluster.iter().map(|p| p.render("x")).join("\\n");
            writeln!(s, "  n{i} [label=\"{label}\"];").unwrap();
        }
        for e in &self.edges {
            writeln!(s, "  n{} -- n{} [label=\"{}/{}\"];", e.a, e.b, e.ka + 1, e.kb + 1).unwrap();
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn run_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Breadth-first exploration of unlabeled seeds within `depth` mutations.
/// The result is the subgraph induced on the ball and does not depend on `jobs`.
pub fn explore_exchange_graph(s0: &GenSeed, depth: usize, jobs: usize) -> Result<ExchangeGraph> {
    explore_generic(
        s0.canonical_form()?.0,
        depth,
        jobs,
        s0.rank(),
        |s: &GenSeed, k| {
            let m = s.mutate(k)?;
            let (c, perm) = m.canonical_form()?;
            let pos = perm.iter().position(|&p| p == k).unwrap();
            Ok((c.key_string(), c, pos))
        },
        |s| s.key_string(),
    )
    .map(|(nodes, edges)| ExchangeGraph {
        nodes: nodes.into_iter().map(|(seed, key, depth)| SeedNode { seed, key, depth }).collect(),
        edges,
    })
}

type Explored<T> = (Vec<(T, String, usize)>, Vec<SeedEdge>);

/// Shared level-synchronous BFS: neighbors of one level are computed in
/// parallel, then merged sequentially in node/index order.
pub(crate) fn explore_generic<T, F, K>(
    start: T,
    depth: usize,
    jobs: usize,
    n: usize,
    step: F,
    key: K,
) -> Result<Explored<T>>
where
    T: Clone + Send + Sync,
    F: Fn(&T, usize) -> Result<(String, T, usize)> + Send + Sync,
    K: Fn(&T) -> String,
{
    let k0 = key(&start);
    let mut nodes = vec![(start, k0.clone(), 0usize)];
    let mut index: HashMap<String, usize> = HashMap::from([(k0, 0)]);
    let mut edges: BTreeSet<SeedEdge> = BTreeSet::new();
    let mut frontier = vec![0usize];
    let mut level = 0;
    while !frontier.is_empty() {
        let items: Vec<(usize, T)> = frontier.iter().map(|&i| (i, nodes[i].0.clone())).collect();
        let results: Vec<Result<Vec<(String, T, usize)>>> =
            run_pool(jobs, || items.par_iter().map(|(_, t)| (0..n).map(|k| step(t, k)).collect()).collect());
        let mut next = Vec::new();
        for ((src, _), res) in items.into_iter().zip(results) {
            for (k, (nk, nt, pos)) in res?.into_iter().enumerate() {
                let dst = match index.get(&nk) {
                    Some(&d) => d,
                    None if level < depth => {
                        let d = nodes.len();
                        index.insert(nk.clone(), d);
                        nodes.push((nt, nk, level + 1));
                        next.push(d);
                        d
                    }
                    None => continue,
                };
                let e = if src <= dst {
                    SeedEdge { a: src, ka: k, b: dst, kb: pos }
                } else {
                    SeedEdge { a: dst, ka: pos, b: src, kb: k }
                };
                edges.insert(e);
            }
        }
        frontier = next;
        level += 1;
    }
    Ok((nodes, edges.into_iter().collect()))
}

/// JSON seed input: `{"b": [[..]], "r": [..], "theta": optional, "cluster": optional names}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedSpec {
    pub b: Vec<Vec<i64>>,
    pub r: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<Vec<String>>,
}

impl SeedSpec {
    pub fn to_seed(&self) -> Result<GenSeed> {
        let m = ExchangeMatrix::new(self.b.clone(), self.r.clone())?;
        let theta = match &self.theta {
            Some(t) => ThetaCoeffs(t.clone()),
            None => ThetaCoeffs::all_ones(&m.r),
        };
        if let Some(names) = &self.cluster {
            if names.len() != m.rank() {
                return Err(Error::Dimension { expected: m.rank(), found: names.len() });
            }
        }
        GenSeed::with_theta(m, theta)
    }

    pub fn names(&self) -> Vec<String> {
        match &self.cluster {
            Some(n) => n.clone(),
            None => (1..=self.b.len()).map(|i| format!("x{i}")).collect(),
        }
    }
}
