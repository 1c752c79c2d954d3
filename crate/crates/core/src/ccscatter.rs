//! Truncated wall-crossing automorphisms, path-ordered products, string
//! F-polynomials and Caldero–Chapoton functions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genseed::{explore_exchange_graph, hat_y, ExchangeMatrix, GenSeed, ThetaCoeffs};
use crate::gentlerep::{g_vector, string_module, submodule_dims, Walk};
use crate::orbsurf::QuiverWithPotential;
use crate::symbolic::{substitute_monomials, ExpVector, LaurentPoly, YPoly};
use crate::taufan::{stau_exchange_graph, AirContext, Summand, TauRigidPair};
use crate::tropical::{tropical_step, TropicalState};

pub const DEFAULT_ORDER: usize = 10;

/// Series Σ c·y^n x^m with y-degrees at most `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    pub terms: BTreeMap<(ExpVector, ExpVector), BigInt>,
    pub order: usize,
}

impl TruncSeries {
    pub fn zero(order: usize) -> Self {
        TruncSeries { terms: BTreeMap::new(), order }
    }

    pub fn monomial(y: ExpVector, x: ExpVector, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.add_term(y, x, BigInt::one());
        s
    }

    pub fn x_pow(m: &[i64], order: usize) -> Self {
        Self::monomial(ExpVector::zero(m.len()), ExpVector::from_i64(m), order)
    }

    pub fn add_term(&mut self, y: ExpVector, x: ExpVector, c: BigInt) {
        if c.is_zero() || y.degree() > self.order as i64 {
            return;
        }
        let key = (y, x);
        let v = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        let mut out = TruncSeries { terms: self.terms.clone(), order: self.order.min(other.order) };
        for ((y, x), c) in &other.terms {
            out.add_term(y.clone(), x.clone(), c.clone());
        }
        out.terms.retain(|(y, _), _| y.degree() <= out.order as i64);
        out
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let mut out = TruncSeries::zero(self.order.min(other.order));
        for ((y1, x1), c1) in &self.terms {
            for ((y2, x2), c2) in &other.terms {
                if y1.degree() + y2.degree() <= out.order as i64 {
                    out.add_term(y1.add(y2), x1.add(x2), c1 * c2);
                }
            }
        }
        out
    }

    /// x^g·F(y) as a series.
    pub fn from_x_times_f(g: &[i64], f: &YPoly, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (e, c) in f.as_laurent().terms() {
            out.add_term(e.clone(), ExpVector::from_i64(g), c.clone());
        }
        out
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for ((y, x), c) in self.terms.iter().rev() {
            let mono = [crate::symbolic::render_exp(y, "y"), crate::symbolic::render_exp(x, "x")]
                .into_iter()
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join("*");
            let (sign, mag) = if c < &BigInt::zero() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => f.write_str(&mono)?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        write!(f, " + O(y^{})", self.order + 1)
    }
}

/// Wall with primitive normal d and function f(y^d) = Σ_s coeffs[s]·y^{sd}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub d: Vec<i64>,
    pub coeffs: Vec<i64>,
}

impl Wall {
    /// 1 + y^d, or 1 + y^d + y^{2d} when the mutated vertex has r = 2.
    pub fn new(d: Vec<i64>, r: i64) -> Self {
        Wall { d, coeffs: vec![1; r as usize + 1] }
    }
}

/// Coefficients of f(t)^e in t up to degree `deg`; f(0) must be 1.
fn power_series(coeffs: &[i64], e: i64, deg: usize) -> Vec<BigInt> {
    let f: Vec<BigInt> = (0..=deg).map(|s| BigInt::from(*coeffs.get(s).unwrap_or(&0))).collect();
    let mul = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); deg + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(deg + 1 - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    let base = if e >= 0 {
        f
    } else {
        // 1/f by the recursion g_s = −Σ_{i≥1} f_i g_{s−i}
        let mut g = vec![BigInt::zero(); deg + 1];
        g[0] = BigInt::one();
        for s in 1..=deg {
            let mut acc = BigInt::zero();
            for i in 1..=s {
                acc += &f[i] * &g[s - i];
            }
            g[s] = -acc;
        }
        g
    };
    let mut out = vec![BigInt::zero(); deg + 1];
    out[0] = BigInt::one();
    for _ in 0..e.unsigned_abs() {
        out = mul(&out, &base);
    }
    out
}

fn dot(a: &[i64], b: &[i32]) -> i64 {
    a.iter().zip(b).map(|(x, &y)| x * y as i64).sum()
}

/// φ_w^{sign}: y^n x^m ↦ y^n x^m f(y^d)^{sign·⟨m + B̄n, d⟩}, applied termwise.
/// A y^n factor pairs with the wall through its x-shift B̄n (so that ŷ_j =
/// y_j x^{B̄ e_j}); pass `None` for the pure x-pairing.
pub fn wall_action(w: &Wall, s: &TruncSeries, sign: i64, yshift: Option<&[Vec<i64>]>) -> TruncSeries {
    let dd = w.d.iter().sum::<i64>().max(1) as usize;
    let deg = s.order / dd;
    let mut cache: HashMap<i64, Vec<BigInt>> = HashMap::new();
    let mut out = TruncSeries::zero(s.order);
    for ((y, x), c) in &s.terms {
        let mut e = sign * dot(&w.d, &x.0);
        if let Some(sh) = yshift {
            let m: Vec<i64> = (0..sh.len()).map(|i| sh[i].iter().zip(&y.0).map(|(a, &b)| a * b as i64).sum()).collect();
            e += sign * m.iter().zip(&w.d).map(|(a, b)| a * b).sum::<i64>();
        }
        if e == 0 {
            out.add_term(y.clone(), x.clone(), c.clone());
            continue;
        }
        let ser = cache.entry(e).or_insert_with(|| power_series(&w.coeffs, e, deg));
        for (k, a) in ser.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let shift = ExpVector::from_i64(&w.d.iter().map(|v| v * k as i64).collect::<Vec<_>>());
            out.add_term(y.add(&shift), x.clone(), a * c);
        }
    }
    out
}

/// p(s) = φ_1^{ε_1}(φ_2^{ε_2}(… φ_l^{ε_l}(s))).
pub fn path_product(walls: &[(Wall, i64)], bbar: &[Vec<i64>], s: &TruncSeries) -> TruncSeries {
    walls.iter().rev().fold(s.clone(), |acc, (w, e)| wall_action(w, &acc, *e, Some(bbar)))
}

/// B̄ = B D^{-1} as an integer matrix.
pub fn bbar_matrix(b: &ExchangeMatrix) -> Vec<Vec<i64>> {
    let n = b.rank();
    (0..n).map(|i| (0..n).map(|j| b.bbar(i, j)).collect()).collect()
}

/// Walls crossed along a mutation path from the root, in crossing order. Wall
/// j has normal |c| for the c-vector c of the mutated index before step j;
/// its sign is −sgn(c).
pub fn walls_along(root: &ExchangeMatrix, path: &[usize]) -> Result<Vec<(Wall, i64)>> {
    let mut s = TropicalState::initial(root.clone())?;
    let mut out = Vec::with_capacity(path.len());
    for &k in path {
        let sgn = s.sign(k)?;
        let d: Vec<i64> = s.c[k].iter().map(|x| x.abs()).collect();
        out.push((Wall::new(d, root.r[k]), -sgn));
        s = tropical_step(&s, k)?;
    }
    Ok(out)
}

/// F_M = Σ over coordinate submodules S of y^{dim(M/S)}.
pub fn string_f_polynomial(q: &QuiverWithPotential, w: &Walk) -> Result<YPoly> {
    let subs = submodule_dims(q, w)?;
    let total: Vec<i64> = string_module(q, w)?.dim_vector();
    let mut f = LaurentPoly::zero(q.n);
    for (d, c) in subs {
        let quot: Vec<i64> = total.iter().zip(&d).map(|(a, b)| a - b).collect();
        f.add_term(ExpVector::from_i64(&quot), BigInt::from(c));
    }
    YPoly::from_laurent(f)
}

/// CC(M, 0) = x^{g(M)} F_M(ŷ) for a string module, in the initial cluster of `root`.
pub fn cc_string(q: &QuiverWithPotential, root: &ExchangeMatrix, w: &Walk) -> Result<LaurentPoly> {
    let m = string_module(q, w)?;
    let g = g_vector(&m, q)?;
    let f = string_f_polynomial(q, w)?;
    let images: Vec<LaurentPoly> = (0..q.n).map(|j| hat_y(root, j)).collect::<Result<_>>()?;
    Ok(&substitute_monomials(&f, &images)? * &LaurentPoly::x_pow(&g))
}

/// CC of each slot of a pair; shifted projectives give the initial variables.
pub fn cc_pair(ctx: &AirContext, p: &TauRigidPair) -> Result<Vec<LaurentPoly>> {
    let n = ctx.rank();
    p.summands
        .iter()
        .zip(&p.gvectors)
        .map(|(s, g)| match s {
            Summand::Shifted(i) => Ok(LaurentPoly::var(n, *i)),
            Summand::Module(_) => {
                let w = ctx.walk_for(g)?.ok_or_else(|| Error::Unsupported(format!("no string for g = {g:?}")))?;
                cc_string(&ctx.quiver, ctx.root(), &w)
            }
        })
        .collect()
}

/// CC of a direct sum ⊕ M_i^{b_i}: the product of powers.
pub fn cc_sum(ccs: &[LaurentPoly], mult: &[u32]) -> LaurentPoly {
    let n = ccs.first().map_or(0, |c| c.nvars());
    ccs.iter().zip(mult).fold(LaurentPoly::one(n), |acc, (c, &b)| &acc * &c.pow(b))
}

#[derive(Clone, Debug)]
pub struct ExchangeCheck {
    pub holds: bool,
    pub lhs: LaurentPoly,
    pub rhs: LaurentPoly,
}

/// CC(M_k)·CC(M_k') = θ_k(∏ CC(M_j)^{[b̄_jk]_+}, ∏ CC(M_j)^{[−b̄_jk]_+}) with
/// B read off the normals of `p`.
pub fn verify_exchange(ctx: &AirContext, p: &TauRigidPair, k: usize) -> Result<ExchangeCheck> {
    let pk = ctx.mutate(p, k)?;
    let cc = cc_pair(ctx, p)?;
    let cck = cc_pair(ctx, &pk)?;
    let b = ctx.matrix_at(p)?;
    let n = ctx.rank();
    let (mut u, mut v) = (LaurentPoly::one(n), LaurentPoly::one(n));
    for (j, c) in cc.iter().enumerate() {
        let e = b.bbar(j, k);
        if e > 0 {
            u = &u * &c.pow(e as u32);
        } else if e < 0 {
            v = &v * &c.pow((-e) as u32);
        }
    }
    let rhs = ThetaCoeffs::all_ones(&b.r).eval(k, &u, &v);
    let lhs = &cc[k] * &cck[k];
    Ok(ExchangeCheck { holds: lhs == rhs, lhs, rhs })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub depth: usize,
    pub pair_nodes: usize,
    pub seed_nodes: usize,
    pub pair_edges: usize,
    pub seed_edges: usize,
    /// Pairs whose CC set is not the cluster of any explored seed.
    pub unmatched: usize,
    /// Seeds hit by more than one pair.
    pub collisions: usize,
    /// Pair edges whose image is not a seed edge.
    pub missing_edges: usize,
    /// Nodes where the normal-derived matrix differs from the seed's after reordering.
    pub matrix_mismatches: usize,
    pub exchange_failures: usize,
}

impl SweepReport {
    pub fn ok(&self) -> bool {
        self.pair_nodes == self.seed_nodes
            && self.pair_edges == self.seed_edges
            && self.unmatched == 0
            && self.collisions == 0
            && self.missing_edges == 0
            && self.matrix_mismatches == 0
            && self.exchange_failures == 0
    }
}

/// Explores pairs and seeds to `depth` and checks that pair ↦ (CC of summands,
/// matrix from normals) is a graph isomorphism; also checks every exchange
/// identity at every explored pair.
pub fn pair_seed_sweep(ctx: &AirContext, depth: usize, jobs: usize) -> Result<SweepReport> {
    let pairs = stau_exchange_graph(ctx, &ctx.initial_pair(), depth, jobs)?;
    let seeds = explore_exchange_graph(&GenSeed::initial(ctx.root().clone())?, depth, jobs)?;
    let mut report = SweepReport {
        depth,
        pair_nodes: pairs.nodes.len(),
        seed_nodes: seeds.nodes.len(),
        pair_edges: pairs.edges.len(),
        seed_edges: seeds.edges.len(),
        ..Default::default()
    };
    let key_of = |c: &[LaurentPoly]| c.iter().map(|p| p.render("x")).collect::<BTreeSet<String>>();
    let index: HashMap<BTreeSet<String>, usize> =
        seeds.nodes.iter().enumerate().map(|(i, s)| (key_of(&s.seed.cluster), i)).collect();
    let mut image: Vec<Option<usize>> = Vec::new();
    let mut hit: HashMap<usize, usize> = HashMap::new();
    for (p, _, _) in &pairs.nodes {
        let cc = cc_pair(ctx, p)?;
        let dst = index.get(&key_of(&cc)).copied();
        match dst {
            None => report.unmatched += 1,
            Some(d) => {
                *hit.entry(d).or_default() += 1;
                let seed = &seeds.nodes[d].seed;
                let perm: Vec<usize> = cc.iter().map(|c| seed.cluster.iter().position(|x| x == c).unwrap()).collect();
                let b = ctx.matrix_at(p)?;
                let n = ctx.rank();
                let same = (0..n).all(|i| (0..n).all(|j| b.b[i][j] == seed.matrix.b[perm[i]][perm[j]]));
                if !same {
                    report.matrix_mismatches += 1;
                }
            }
        }
        image.push(dst);
        for k in 0..ctx.rank() {
            if !verify_exchange(ctx, p, k)?.holds {
                report.exchange_failures += 1;
            }
        }
    }
    report.collisions = hit.values().filter(|&&c| c > 1).count();
    let seed_edges: BTreeSet<(usize, usize)> = seeds.edges.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
    for e in &pairs.edges {
        match (image[e.a], image[e.b]) {
            (Some(a), Some(b)) if seed_edges.contains(&(a.min(b), a.max(b))) => {}
            _ => report.missing_edges += 1,
        }
    }
    Ok(report)
}
