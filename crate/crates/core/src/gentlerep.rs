//! Representations of the gentle Jacobian algebra P(κ) over the rationals.
//!
//! Conventions: an arrow `a: i -> j` acts as a linear map `M_i -> M_j`, so
//! `maps[a]` has shape `dims[j] x dims[i]`. A path is stored as the list of
//! arrows in the order they are applied.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix, Q};
use crate::orbsurf::{quiver_of, ArrowKind, QuiverWithPotential, Side, Triangulation};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuiverRep {
    pub dims: Vec<usize>,
    /// Indexed like `QuiverWithPotential::arrows`.
    pub maps: Vec<QMatrix>,
}

/// JSON form: `{"dims": [..], "maps": {"arrowId": [["0","1"], ..]}}`; absent maps are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepJson {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub maps: BTreeMap<String, Vec<Vec<String>>>,
}

impl QuiverRep {
    pub fn zero(q: &QuiverWithPotential) -> Self {
        Self::with_dims(q, vec![0; q.n])
    }

    /// Zero maps on the given dimension vector.
    pub fn with_dims(q: &QuiverWithPotential, dims: Vec<usize>) -> Self {
        let maps = q.arrows.iter().map(|a| QMatrix::zeros(dims[a.head], dims[a.tail])).collect();
        QuiverRep { dims, maps }
    }

    pub fn simple(q: &QuiverWithPotential, i: usize) -> Self {
        let mut dims = vec![0; q.n];
        dims[i] = 1;
        Self::with_dims(q, dims)
    }

    pub fn dim_vector(&self) -> Vec<i64> {
        self.dims.iter().map(|&d| d as i64).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn direct_sum(&self, other: &QuiverRep, q: &QuiverWithPotential) -> QuiverRep {
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = q
            .arrows
            .iter()
            .enumerate()
            .map(|(x, a)| {
                let mut m = QMatrix::zeros(dims[a.head], dims[a.tail]);
                m.set_block(0, 0, &self.maps[x]);
                m.set_block(self.dims[a.head], self.dims[a.tail], &other.maps[x]);
                m
            })
            .collect();
        QuiverRep { dims, maps }
    }

    pub fn from_json(q: &QuiverWithPotential, j: &RepJson) -> Result<Self> {
        if j.dims.len() != q.n {
            return Err(Error::Dimension { expected: q.n, found: j.dims.len() });
        }
        let mut rep = Self::with_dims(q, j.dims.clone());
        for (id, rows) in &j.maps {
            let a = q.arrow_index(id).ok_or_else(|| Error::Parse(format!("unknown arrow {id}")))?;
            let (h, t) = (rep.dims[q.arrows[a].head], rep.dims[q.arrows[a].tail]);
            if rows.len() != h || rows.iter().any(|r| r.len() != t) {
                return Err(Error::Shape(format!("arrow {id} needs a {h}x{t} matrix")));
            }
            let parsed: Vec<Vec<Q>> = rows
                .iter()
                .map(|r| {
                    r.iter().map(|s| Q::from_str(s.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))).collect()
                })
                .collect::<Result<_>>()?;
            rep.maps[a] = QMatrix::from_rows(&parsed, t);
        }
        Ok(rep)
    }

    pub fn to_json(&self, q: &QuiverWithPotential) -> RepJson {
        let maps = q
            .arrows
            .iter()
            .zip(&self.maps)
            .filter(|(_, m)| m.rows() > 0 && m.cols() > 0)
            .map(|(a, m)| {
                (a.id.clone(), m.to_rows().iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect())
            })
            .collect();
        RepJson { dims: self.dims.clone(), maps }
    }

    fn check_shapes(&self, q: &QuiverWithPotential) -> Result<()> {
        if self.dims.len() != q.n || self.maps.len() != q.arrows.len() {
            return Err(Error::Shape("representation does not match the quiver".into()));
        }
        for (a, m) in q.arrows.iter().zip(&self.maps) {
            if m.rows() != self.dims[a.head] || m.cols() != self.dims[a.tail] {
                return Err(Error::Shape(format!("arrow {} has shape {}x{}", a.id, m.rows(), m.cols())));
            }
        }
        Ok(())
    }
}

pub fn check_relations(m: &QuiverRep, q: &QuiverWithPotential) -> Result<()> {
    m.check_shapes(q)?;
    for r in &q.relations {
        if !m.maps[r.then].mul(&m.maps[r.first]).is_zero() {
            return Err(Error::Relation(format!("{} after {}", q.arrows[r.then].id, q.arrows[r.first].id)));
        }
    }
    Ok(())
}

/// Nonzero paths of P(κ) grouped by starting vertex, trivial path first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathBasis {
    pub paths: Vec<Vec<Vec<usize>>>,
}

impl PathBasis {
    pub fn end(&self, q: &QuiverWithPotential, start: usize, p: &[usize]) -> usize {
        p.last().map(|&a| q.arrows[a].head).unwrap_or(start)
    }
}

pub fn path_basis(q: &QuiverWithPotential) -> Result<PathBasis> {
    let bound = 2 * q.arrows.len() + 2;
    let mut paths = Vec::with_capacity(q.n);
    for v in 0..q.n {
        let mut found: Vec<Vec<usize>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for p in &frontier {
                let at = p.last().map(|&a| q.arrows[a].head).unwrap_or(v);
                for (a, arrow) in q.arrows.iter().enumerate() {
                    if arrow.tail != at || p.last().is_some_and(|&l| q.is_relation(l, a)) {
                        continue;
                    }
                    let mut np = p.clone();
                    np.push(a);
                    if np.len() > bound {
                        return Err(Error::InfiniteDimensional(v + 1));
                    }
                    next.push(np);
                }
            }
            found.extend(next.iter().cloned());
            frontier = next;
        }
        paths.push(found);
    }
    Ok(PathBasis { paths })
}

/// P_i: basis the paths from i, arrows acting by concatenation.
pub fn projective(q: &QuiverWithPotential, basis: &PathBasis, i: usize) -> QuiverRep {
    let paths = &basis.paths[i];
    let mut slot: Vec<(usize, usize)> = Vec::with_capacity(paths.len());
    let mut dims = vec![0; q.n];
    for p in paths {
        let e = basis.end(q, i, p);
        slot.push((e, dims[e]));
        dims[e] += 1;
    }
    let mut rep = QuiverRep::with_dims(q, dims);
    for (x, p) in paths.iter().enumerate() {
        let (e, col) = slot[x];
        for (a, arrow) in q.arrows.iter().enumerate() {
            if arrow.tail != e || p.last().is_some_and(|&l| q.is_relation(l, a)) {
                continue;
            }
            let mut np = p.clone();
            np.push(a);
            if let Some(y) = paths.iter().position(|r| *r == np) {
                rep.maps[a][(slot[y].1, col)] = Q::one();
            }
        }
    }
    rep
}

pub fn projectives(q: &QuiverWithPotential) -> Result<Vec<QuiverRep>> {
    let basis = path_basis(q)?;
    Ok((0..q.n).map(|i| projective(q, &basis, i)).collect())
}

/// Linear system whose solutions are the homomorphisms m -> n.
fn hom_system(m: &QuiverRep, n: &QuiverRep, q: &QuiverWithPotential) -> (QMatrix, Vec<usize>) {
    let mut offs = Vec::with_capacity(q.n + 1);
    let mut total = 0;
    for v in 0..q.n {
        offs.push(total);
        total += n.dims[v] * m.dims[v];
    }
    offs.push(total);
    let var = |v: usize, r: usize, c: usize| offs[v] + r * m.dims[v] + c;
    let mut rows: Vec<Vec<(usize, Q)>> = Vec::new();
    for (x, a) in q.arrows.iter().enumerate() {
        let (u, w) = (a.tail, a.head);
        let (ma, na) = (&m.maps[x], &n.maps[x]);
        for r in 0..n.dims[w] {
            for c in 0..m.dims[u] {
                // (X_w M_a)[r,c] - (N_a X_u)[r,c]
                let mut row: BTreeMap<usize, Q> = BTreeMap::new();
                for s in 0..m.dims[w] {
                    let coef = &ma[(s, c)];
                    if !coef.is_zero() {
                        *row.entry(var(w, r, s)).or_insert_with(Q::zero) += coef;
                    }
                }
                for t in 0..n.dims[u] {
                    let coef = &na[(r, t)];
                    if !coef.is_zero() {
                        *row.entry(var(u, t, c)).or_insert_with(Q::zero) -= coef;
                    }
                }
                row.retain(|_, v| !v.is_zero());
                if !row.is_empty() {
                    rows.push(row.into_iter().collect());
                }
            }
        }
    }
    let mut a = QMatrix::zeros(rows.len(), total);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row {
            a[(i, *j)] = v.clone();
        }
    }
    (a, offs)
}

pub fn hom_dim(m: &QuiverRep, n: &QuiverRep, q: &QuiverWithPotential) -> usize {
    let (a, offs) = hom_system(m, n, q);
    offs[q.n] - a.rank()
}

/// A basis of Hom(m, n), each element given by its per-vertex matrices.
pub fn hom_basis(m: &QuiverRep, n: &QuiverRep, q: &QuiverWithPotential) -> Vec<Vec<QMatrix>> {
    let (a, offs) = hom_system(m, n, q);
    let ns = a.nullspace();
    (0..ns.cols())
        .map(|j| {
            (0..q.n)
                .map(|v| {
                    let mut x = QMatrix::zeros(n.dims[v], m.dims[v]);
                    for r in 0..n.dims[v] {
                        for c in 0..m.dims[v] {
                            x[(r, c)] = ns[(offs[v] + r * m.dims[v] + c, j)].clone();
                        }
                    }
                    x
                })
                .collect()
        })
        .collect()
}

/// Isomorphism test: equal dimensions, matching hom dimensions, and an explicit
/// invertible intertwiner found among combinations of a Hom basis.
pub fn is_isomorphic(m: &QuiverRep, n: &QuiverRep, q: &QuiverWithPotential) -> bool {
    if m.dims != n.dims {
        return false;
    }
    let hmn = hom_dim(m, n, q);
    if hmn != hom_dim(m, m, q) || hmn != hom_dim(n, n, q) {
        return false;
    }
    if m.is_zero() {
        return true;
    }
    let basis = hom_basis(m, n, q);
    let mut rng = StdRng::seed_from_u64(0x2545_f491_4f6c_dd1d);
    for _ in 0..24 {
        let coefs: Vec<Q> = basis.iter().map(|_| linalg::q(rng.gen_range(-48..=48))).collect();
        let invertible = (0..q.n).all(|v| {
            if m.dims[v] == 0 {
                return true;
            }
            let mut x = QMatrix::zeros(m.dims[v], m.dims[v]);
            for (c, h) in coefs.iter().zip(&basis) {
                x = x.add(&h[v].scale(c));
            }
            !x.determinant().is_zero()
        });
        if invertible {
            return true;
        }
    }
    false
}

/// Columns spanning rad(M)_v = sum of images of arrows ending at v.
fn radical(m: &QuiverRep, q: &QuiverWithPotential, v: usize) -> QMatrix {
    let blocks: Vec<&QMatrix> =
        q.arrows.iter().enumerate().filter(|(_, a)| a.head == v).map(|(x, _)| &m.maps[x]).collect();
    QMatrix::hstack(&blocks, m.dims[v])
}

/// Dimension vector of top(M) = M / rad M.
pub fn top(m: &QuiverRep, q: &QuiverWithPotential) -> Vec<i64> {
    (0..q.n).map(|v| (m.dims[v] - radical(m, q, v).rank()) as i64).collect()
}

/// Standard basis vectors of M_v completing a basis of rad(M)_v.
fn top_representatives(m: &QuiverRep, q: &QuiverWithPotential, v: usize) -> Vec<Vec<Q>> {
    let mut cur = radical(m, q, v);
    let mut rank = cur.rank();
    let mut reps = Vec::new();
    for j in 0..m.dims[v] {
        let mut e = QMatrix::zeros(m.dims[v], 1);
        e[(j, 0)] = Q::one();
        let cand = QMatrix::hstack(&[&cur, &e], m.dims[v]);
        let r = cand.rank();
        if r > rank {
            cur = cand;
            rank = r;
            reps.push(e.col(0));
        }
    }
    reps
}

/// Minimal projective presentation P^1 -> P^0 -> M -> 0, as multiplicities of P_i.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub p1: Vec<i64>,
    pub p0: Vec<i64>,
}

impl Presentation {
    /// g(M) = [P^1] - [P^0].
    pub fn g_vector(&self) -> Vec<i64> {
        self.p1.iter().zip(&self.p0).map(|(a, b)| a - b).collect()
    }
}

pub fn min_presentation(m: &QuiverRep, q: &QuiverWithPotential) -> Result<Presentation> {
    check_relations(m, q)?;
    let basis = path_basis(q)?;
    let mut summands: Vec<(usize, Vec<Q>)> = Vec::new();
    for v in 0..q.n {
        for r in top_representatives(m, q, v) {
            summands.push((v, r));
        }
    }
    let p0: Vec<i64> = (0..q.n).map(|v| summands.iter().filter(|s| s.0 == v).count() as i64).collect();
    // P^0 as a direct sum, with f: P^0 -> M sending e_v of each summand to its representative.
    let mut cover = QuiverRep::zero(q);
    let mut f: Vec<QMatrix> = (0..q.n).map(|u| QMatrix::zeros(m.dims[u], 0)).collect();
    for (v, rep) in &summands {
        let p = projective(q, &basis, *v);
        let mut cols: Vec<Vec<Vec<Q>>> = vec![Vec::new(); q.n];
        for path in &basis.paths[*v] {
            let mut x = QMatrix::from_rows(&rep.iter().map(|c| vec![c.clone()]).collect::<Vec<_>>(), 1);
            for &a in path {
                x = m.maps[a].mul(&x);
            }
            cols[basis.end(q, *v, path)].push(x.col(0));
        }
        for u in 0..q.n {
            let block = QMatrix::from_rows(&cols[u], m.dims[u]).transpose();
            let block = if cols[u].is_empty() { QMatrix::zeros(m.dims[u], 0) } else { block };
            f[u] = QMatrix::hstack(&[&f[u], &block], m.dims[u]);
        }
        cover = cover.direct_sum(&p, q);
    }
    // top of the kernel of f
    let kernels: Vec<QMatrix> = f.iter().map(|fu| fu.nullspace()).collect();
    let p1 = (0..q.n)
        .map(|w| {
            let images: Vec<QMatrix> = q
                .arrows
                .iter()
                .enumerate()
                .filter(|(_, a)| a.head == w)
                .map(|(x, a)| cover.maps[x].mul(&kernels[a.tail]))
                .collect();
            let refs: Vec<&QMatrix> = images.iter().collect();
            (kernels[w].cols() - QMatrix::hstack(&refs, cover.dims[w]).rank()) as i64
        })
        .collect();
    Ok(Presentation { p1, p0 })
}

pub fn g_vector(m: &QuiverRep, q: &QuiverWithPotential) -> Result<Vec<i64>> {
    Ok(min_presentation(m, q)?.g_vector())
}

pub fn pairing(g: &[i64], d: &[i64]) -> i64 {
    g.iter().zip(d).map(|(a, b)| a * b).sum()
}

/// dim Hom(n, τm) from the pairing identity ⟨g(m), dim n⟩ = hom(n, τm) - hom(m, n).
pub fn hom_into_tau(m: &QuiverRep, g_m: &[i64], n: &QuiverRep, q: &QuiverWithPotential) -> i64 {
    pairing(g_m, &n.dim_vector()) + hom_dim(m, n, q) as i64
}

pub fn tau_rigid(m: &QuiverRep, q: &QuiverWithPotential) -> Result<bool> {
    let g = g_vector(m, q)?;
    Ok(hom_into_tau(m, &g, m, q) == 0)
}

/// (M, P) with P = ⊕ P_v for v in `proj`: M τ-rigid and Hom(P, M) = 0.
pub fn tau_rigid_pair(m: &QuiverRep, proj: &[usize], q: &QuiverWithPotential) -> Result<bool> {
    Ok(proj.iter().all(|&v| m.dims[v] == 0) && tau_rigid(m, q)?)
}

/// Hom(M_2, τM_1) = 0 and Hom(M_1, τM_2) = 0.
pub fn modules_compatible(m1: &QuiverRep, m2: &QuiverRep, q: &QuiverWithPotential) -> Result<bool> {
    let (g1, g2) = (g_vector(m1, q)?, g_vector(m2, q)?);
    Ok(hom_into_tau(m1, &g1, m2, q) == 0 && hom_into_tau(m2, &g2, m1, q) == 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub arrow: usize,
    pub inverse: bool,
}

/// A walk in Q(κ): node `i` and node `i+1` are joined by `letters[i]`; a direct
/// letter runs from node `i` to node `i+1` along its arrow.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Walk {
    pub start: usize,
    pub letters: Vec<Letter>,
}

impl Walk {
    pub fn trivial(v: usize) -> Self {
        Walk { start: v, letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Vertex of each node, or the first inconsistent position.
    pub fn vertices(&self, q: &QuiverWithPotential) -> Result<Vec<usize>> {
        let mut out = vec![self.start];
        for (pos, l) in self.letters.iter().enumerate() {
            let a = q.arrows.get(l.arrow).ok_or_else(|| Error::InvalidWalk { pos, reason: "unknown arrow".into() })?;
            let (from, to) = if l.inverse { (a.head, a.tail) } else { (a.tail, a.head) };
            if from != out[pos] {
                return Err(Error::InvalidWalk {
                    pos,
                    reason: format!("arrow {} does not start at vertex {}", a.id, out[pos] + 1),
                });
            }
            out.push(to);
        }
        Ok(out)
    }

    pub fn validate(&self, q: &QuiverWithPotential) -> Result<()> {
        if self.start >= q.n {
            return Err(Error::InvalidWalk { pos: 0, reason: "start vertex out of range".into() });
        }
        self.vertices(q)?;
        for (pos, w) in self.letters.windows(2).enumerate() {
            if let Some(reason) = step_violation(q, w[0], w[1]) {
                return Err(Error::InvalidWalk { pos: pos + 1, reason });
            }
        }
        Ok(())
    }

    pub fn inverse(&self, q: &QuiverWithPotential) -> Result<Walk> {
        let end = *self.vertices(q)?.last().unwrap();
        let letters = self.letters.iter().rev().map(|l| Letter { arrow: l.arrow, inverse: !l.inverse }).collect();
        Ok(Walk { start: end, letters })
    }

    /// The smaller of the walk and its inverse.
    pub fn canonical(&self, q: &QuiverWithPotential) -> Result<Walk> {
        let inv = self.inverse(q)?;
        Ok(if inv < *self { inv } else { self.clone() })
    }

    pub fn render(&self, q: &QuiverWithPotential) -> String {
        let mut out = format!("@{}", self.start + 1);
        for l in &self.letters {
            out.push(' ');
            out.push_str(&q.arrows[l.arrow].id);
            if l.inverse {
                out.push_str("^-1");
            }
        }
        out
    }

    /// Parses `@v id id^-1 ...`; the `@v` prefix may be omitted for nonempty walks.
    pub fn parse(q: &QuiverWithPotential, s: &str) -> Result<Walk> {
        let mut toks = s.split_whitespace().peekable();
        let mut start = None;
        if let Some(t) = toks.peek() {
            if let Some(v) = t.strip_prefix('@') {
                let v: usize = v.parse().map_err(|_| Error::Parse(format!("bad vertex {t}")))?;
                if v == 0 || v > q.n {
                    return Err(Error::Parse(format!("vertex {v} out of range")));
                }
                start = Some(v - 1);
                toks.next();
            }
        }
        let mut letters = Vec::new();
        for t in toks {
            let (id, inverse) = match t.strip_suffix("^-1") {
                Some(id) => (id, true),
                None => (t, false),
            };
            let arrow = q.arrow_index(id).ok_or_else(|| Error::Parse(format!("unknown arrow {id}")))?;
            letters.push(Letter { arrow, inverse });
        }
        let start = match (start, letters.first()) {
            (Some(s), _) => s,
            (None, Some(l)) => {
                let a = &q.arrows[l.arrow];
                if l.inverse {
                    a.head
                } else {
                    a.tail
                }
            }
            (None, None) => return Err(Error::Parse("empty walk needs a start vertex".into())),
        };
        let w = Walk { start, letters };
        w.validate(q)?;
        Ok(w)
    }
}

fn step_violation(q: &QuiverWithPotential, l1: Letter, l2: Letter) -> Option<String> {
    let (a, b) = (&q.arrows[l1.arrow].id, &q.arrows[l2.arrow].id);
    match (l1.inverse, l2.inverse) {
        (false, false) if q.is_relation(l1.arrow, l2.arrow) => Some(format!("forbidden subpath {b} after {a}")),
        (true, true) if q.is_relation(l2.arrow, l1.arrow) => Some(format!("forbidden subpath {a} after {b}")),
        (false, true) | (true, false) if l1.arrow == l2.arrow => Some(format!("backtracking along {a}")),
        _ => None,
    }
}

/// String module of a walk, realized by 0/1 matrices; basis at each vertex in node order.
pub fn string_module(q: &QuiverWithPotential, w: &Walk) -> Result<QuiverRep> {
    w.validate(q)?;
    let verts = w.vertices(q)?;
    let mut dims = vec![0; q.n];
    let mut slot = Vec::with_capacity(verts.len());
    for &v in &verts {
        slot.push(dims[v]);
        dims[v] += 1;
    }
    let mut rep = QuiverRep::with_dims(q, dims);
    for (i, l) in w.letters.iter().enumerate() {
        let (from, to) = if l.inverse { (i + 1, i) } else { (i, i + 1) };
        rep.maps[l.arrow][(slot[to], slot[from])] = Q::one();
    }
    Ok(rep)
}

/// Dimension vectors of the arrow-closed coordinate subsets of a string
/// module (its torus-fixed submodules), with multiplicities.
pub fn submodule_dims(q: &QuiverWithPotential, w: &Walk) -> Result<BTreeMap<Vec<i64>, u64>> {
    let verts = w.vertices(q)?;
    let unit = |v: usize| -> Vec<i64> { (0..q.n).map(|i| i64::from(i == v)).collect() };
    let add = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    // (last node included?, dims) -> count
    let mut states: BTreeMap<(bool, Vec<i64>), u64> = BTreeMap::new();
    states.insert((false, vec![0; q.n]), 1);
    states.insert((true, unit(verts[0])), 1);
    for (i, l) in w.letters.iter().enumerate() {
        let mut next: BTreeMap<(bool, Vec<i64>), u64> = BTreeMap::new();
        for ((prev_in, d), c) in &states {
            for cur_in in [false, true] {
                // direct letter: node i -> node i+1; inverse: node i+1 -> node i
                let ok = if l.inverse { !cur_in || *prev_in } else { !*prev_in || cur_in };
                if !ok {
                    continue;
                }
                let nd = if cur_in { add(d, &unit(verts[i + 1])) } else { d.clone() };
                *next.entry((cur_in, nd)).or_default() += c;
            }
        }
        states = next;
    }
    let mut out: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for ((_, d), c) in states {
        *out.entry(d).or_default() += c;
    }
    Ok(out)
}

/// All strings (one per inversion class) whose basis has exactly `dims[v]`
/// points at each vertex v.
pub fn strings_with_dims(q: &QuiverWithPotential, dims: &[i64]) -> Vec<Walk> {
    let total: i64 = dims.iter().sum();
    let mut out: BTreeSet<Walk> = BTreeSet::new();
    if total <= 0 || dims.iter().any(|&d| d < 0) {
        return Vec::new();
    }
    fn extend(
        q: &QuiverWithPotential,
        w: &mut Walk,
        end: usize,
        left: &mut Vec<i64>,
        remaining: i64,
        out: &mut BTreeSet<Walk>,
    ) {
        if remaining == 0 {
            out.insert(w.canonical(q).expect("walk built from valid letters"));
            return;
        }
        for (x, a) in q.arrows.iter().enumerate() {
            for inverse in [false, true] {
                let (from, to) = if inverse { (a.head, a.tail) } else { (a.tail, a.head) };
                if from != end || left[to] == 0 {
                    continue;
                }
                let l = Letter { arrow: x, inverse };
                if w.letters.last().is_some_and(|&p| step_violation(q, p, l).is_some()) {
                    continue;
                }
                w.letters.push(l);
                left[to] -= 1;
                extend(q, w, to, left, remaining - 1, out);
                left[to] += 1;
                w.letters.pop();
            }
        }
    }
    for v in 0..q.n {
        if dims[v] == 0 {
            continue;
        }
        let mut left = dims.to_vec();
        left[v] -= 1;
        let mut w = Walk::trivial(v);
        extend(q, &mut w, v, &mut left, total - 1, &mut out);
    }
    out.into_iter().collect()
}

/// A walk whose string module is isomorphic to `m`, searching strings of at
/// most `max_len` letters.
pub fn string_of(q: &QuiverWithPotential, m: &QuiverRep, max_len: usize) -> Option<Walk> {
    let total = m.total_dim();
    if total == 0 || total > max_len + 1 {
        return None;
    }
    enumerate_strings(q, total - 1).into_iter().filter(|w| w.len() + 1 == total).find(|w| {
        let s = string_module(q, w).expect("enumerated walk");
        s.dims == m.dims && is_isomorphic(&s, m, q)
    })
}

/// All strings with at most `max_len` letters, one walk per inversion class.
pub fn enumerate_strings(q: &QuiverWithPotential, max_len: usize) -> Vec<Walk> {
    let mut out: BTreeSet<Walk> = BTreeSet::new();
    let mut frontier: Vec<(Walk, usize)> = (0..q.n).map(|v| (Walk::trivial(v), v)).collect();
    for (w, _) in &frontier {
        out.insert(w.clone());
    }
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, end) in &frontier {
            for (x, a) in q.arrows.iter().enumerate() {
                for inverse in [false, true] {
                    let (from, to) = if inverse { (a.head, a.tail) } else { (a.tail, a.head) };
                    if from != *end {
                        continue;
                    }
                    let l = Letter { arrow: x, inverse };
                    if w.letters.last().is_some_and(|&p| step_violation(q, p, l).is_some()) {
                        continue;
                    }
                    let mut nw = w.clone();
                    nw.letters.push(l);
                    next.push((nw, to));
                }
            }
        }
        for (w, _) in &next {
            out.insert(w.canonical(q).expect("walk built from valid letters"));
        }
        frontier = next;
    }
    out.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reflection {
    Plus,
    Minus,
}

type Key = (usize, usize, Side);

/// Arrow correspondences of a flip at vertex `k`, read off its triangle slots.
struct FlipLocal {
    /// σ-arrow key of a* and the κ-arrow key of a, for a: i -> k.
    incoming: Vec<(Key, Key)>,
    /// σ-arrow key of b* and the κ-arrow key of b, for b: k -> j.
    outgoing: Vec<(Key, Key)>,
    /// New arrows d = b∘a (through ε_k when pending).
    composites: Vec<(Key, Key, Key)>,
    /// Internal triangles through k: (a, b, c) with i -a-> k -b-> j -c-> i.
    internal: Vec<(Key, Key, Key)>,
}

fn flip_local(t: &Triangulation, k: usize) -> FlipLocal {
    let arc = k + 1;
    let slots = t.slots_of(arc);
    let kk = Side::Arc(arc);
    let mut loc =
        FlipLocal { incoming: Vec::new(), outgoing: Vec::new(), composites: Vec::new(), internal: Vec::new() };
    let v = |s: &Side| s.arc().map(|a| a - 1);
    // (x_in, third of a in κ, third of a* in σ) and (x_out, third of b in κ, third of b* in σ)
    let mut ins: Vec<(Side, Side, Side)> = Vec::new();
    let mut outs: Vec<(Side, Side, Side)> = Vec::new();
    // (index into ins, index into outs) joined by a new arrow through k
    let pairs: Vec<(usize, usize)> = if t.is_pending(arc) {
        let [_, x1, x2] = slots[0].1.clone();
        ins.push((x2.clone(), x1.clone(), x1.clone()));
        outs.push((x1.clone(), x2.clone(), x2.clone()));
        vec![(0, 0)]
    } else {
        let [_, x1, x2] = slots[0].1.clone();
        let [_, x3, x4] = slots[1].1.clone();
        ins.push((x2.clone(), x1.clone(), x3.clone()));
        ins.push((x4.clone(), x3.clone(), x1.clone()));
        outs.push((x1.clone(), x2.clone(), x4.clone()));
        outs.push((x3.clone(), x4.clone(), x2.clone()));
        vec![(0, 1), (1, 0)]
    };
    for (x, th, th2) in &ins {
        if let Some(i) = v(x) {
            loc.incoming.push(((k, i, th2.clone()), (i, k, th.clone())));
        }
    }
    for (x, th, th2) in &outs {
        if let Some(j) = v(x) {
            loc.outgoing.push(((j, k, th2.clone()), (k, j, th.clone())));
        }
    }
    for &(pi, po) in &pairs {
        let (a, b) = (&ins[pi], &outs[po]);
        if let (Some(i), Some(j)) = (v(&a.0), v(&b.0)) {
            loc.composites.push(((i, j, kk.clone()), (i, k, a.1.clone()), (k, j, b.1.clone())));
        }
    }
    for (_, sides) in &slots {
        let [_, x1, x2] = sides.clone();
        if let (Some(j), Some(i)) = (v(&x1), v(&x2)) {
            loc.internal.push(((i, k, x1.clone()), (k, j, x2.clone()), (j, i, kk.clone())));
        }
    }
    loc
}

fn arrow_by_key(q: &QuiverWithPotential, key: &Key) -> Result<usize> {
    q.find(key.0, key.1, Some(&key.2))
        .ok_or_else(|| Error::Invariant(format!("no arrow {}->{} opposite {}", key.0 + 1, key.1 + 1, key.2)))
}

/// Reflection functor F_k^± from modules over P(t) to modules over P(μ_k(t)); `k` is a 0-based vertex.
pub fn reflect(t: &Triangulation, m: &QuiverRep, k: usize, sign: Reflection) -> Result<(QuiverRep, Triangulation)> {
    let q = t.quiver()?;
    if k >= q.n {
        return Err(Error::IndexOutOfRange { index: k, n: q.n });
    }
    check_relations(m, &q)?;
    let sigma = t.flip(k + 1)?;
    let qs = quiver_of(&sigma);
    let loc = flip_local(t, k);
    let pending = q.pending[k];
    let eps = q.loop_at(k).map(|e| m.maps[e].clone());
    let dk = m.dims[k];

    // Components of the ambient space: one per incoming (F+) or outgoing (F-) arrow,
    // split into (ε-part, 1-part) when k is pending.
    let comps: Vec<(Key, usize)> = match sign {
        Reflection::Plus => loc.incoming.iter().map(|(_, a)| (a.clone(), m.dims[a.0])).collect(),
        Reflection::Minus => loc.outgoing.iter().map(|(_, b)| (b.clone(), m.dims[b.1])).collect(),
    };
    let width = if pending { 2 } else { 1 };
    let mut offs = Vec::new();
    let mut amb = 0;
    for (_, d) in &comps {
        offs.push(amb);
        amb += width * d;
    }
    let comp_of = |key: &Key| comps.iter().position(|(c, _)| c == key);
    // E: (u, v) -> (v, 0) on each component (u = ε-part, v = 1-part)
    let mut e_amb = QMatrix::zeros(amb, amb);
    if pending {
        for (c, (_, d)) in comps.iter().enumerate() {
            for r in 0..*d {
                e_amb[(offs[c] + r, offs[c] + d + r)] = Q::one();
            }
        }
    }
    // coordinates of a vector of M_x placed in the 1-part (or whole) of component c
    let inc_one = |c: usize, mat: &QMatrix| {
        let d = comps[c].1;
        let mut out = QMatrix::zeros(amb, mat.cols());
        out.set_block(offs[c] + if pending { d } else { 0 }, 0, mat);
        out
    };

    let new_k;
    let mut star: BTreeMap<Key, QMatrix> = BTreeMap::new();
    let eps_new;
    match sign {
        Reflection::Plus => {
            let mut alpha = QMatrix::zeros(dk, amb);
            for (c, (key, d)) in comps.iter().enumerate() {
                let ma = &m.maps[arrow_by_key(&q, key)?];
                if pending {
                    alpha.set_block(0, offs[c], &eps.as_ref().unwrap().mul(ma));
                    alpha.set_block(0, offs[c] + d, ma);
                } else {
                    alpha.set_block(0, offs[c], ma);
                }
            }
            let kmat = alpha.nullspace();
            new_k = kmat.cols();
            let coords = |x: &QMatrix| kmat.solve(x).ok_or_else(|| Error::Invariant("vector outside ker α".into()));
            for (skey, akey) in &loc.incoming {
                let c = comp_of(akey).unwrap();
                let proj = kmat.block(offs[c], 0, comps[c].1, new_k);
                star.insert(skey.clone(), proj);
            }
            for (skey, bkey) in &loc.outgoing {
                let j = bkey.1;
                let map = match loc.internal.iter().find(|(_, b, _)| b == bkey) {
                    Some((akey, _, ckey)) => {
                        let mc = &m.maps[arrow_by_key(&q, ckey)?];
                        coords(&inc_one(comp_of(akey).unwrap(), mc))?
                    }
                    None => QMatrix::zeros(new_k, m.dims[j]),
                };
                star.insert(skey.clone(), map);
            }
            eps_new = if pending { Some(coords(&e_amb.mul(&kmat))?) } else { None };
        }
        Reflection::Minus => {
            let mut beta = QMatrix::zeros(amb, dk);
            for (c, (key, d)) in comps.iter().enumerate() {
                let mb = &m.maps[arrow_by_key(&q, key)?];
                if pending {
                    beta.set_block(offs[c], 0, mb);
                    beta.set_block(offs[c] + d, 0, &mb.mul(eps.as_ref().unwrap()));
                } else {
                    beta.set_block(offs[c], 0, mb);
                }
            }
            let pi = beta.left_nullspace();
            new_k = pi.rows();
            let right = if new_k == 0 {
                QMatrix::zeros(amb, 0)
            } else {
                pi.right_inverse().ok_or_else(|| Error::Invariant("cokernel projection has no right inverse".into()))?
            };
            for (skey, bkey) in &loc.outgoing {
                let c = comp_of(bkey).unwrap();
                let id = QMatrix::identity(comps[c].1);
                star.insert(skey.clone(), pi.mul(&inc_one(c, &id)));
            }
            for (skey, akey) in &loc.incoming {
                let i = akey.0;
                let map = match loc.internal.iter().find(|(a, _, _)| a == akey) {
                    Some((_, bkey, ckey)) => {
                        let mc = &m.maps[arrow_by_key(&q, ckey)?];
                        let c = comp_of(bkey).unwrap();
                        let mut tilde = QMatrix::zeros(m.dims[i], amb);
                        tilde.set_block(0, offs[c], mc);
                        if !tilde.mul(&beta).is_zero() {
                            return Err(Error::Invariant("induced map does not vanish on im β".into()));
                        }
                        tilde.mul(&right)
                    }
                    None => QMatrix::zeros(m.dims[i], new_k),
                };
                star.insert(skey.clone(), map);
            }
            eps_new = if pending { Some(pi.mul(&e_amb).mul(&right)) } else { None };
        }
    }

    let mut dims = m.dims.clone();
    dims[k] = new_k;
    let mut out = QuiverRep::with_dims(&qs, dims);
    for (x, arrow) in qs.arrows.iter().enumerate() {
        let map = match &arrow.kind {
            ArrowKind::Loop if arrow.tail == k => eps_new.clone().unwrap(),
            ArrowKind::Loop => m.maps[q.loop_at(arrow.tail).unwrap()].clone(),
            ArrowKind::Triangle { third } => {
                let key = (arrow.tail, arrow.head, third.clone());
                if let Some(mat) = star.get(&key) {
                    mat.clone()
                } else if let Some((_, akey, bkey)) = loc.composites.iter().find(|(d, _, _)| *d == key) {
                    let ma = &m.maps[arrow_by_key(&q, akey)?];
                    let mb = &m.maps[arrow_by_key(&q, bkey)?];
                    match &eps {
                        Some(e) => mb.mul(e).mul(ma),
                        None => mb.mul(ma),
                    }
                } else {
                    m.maps[arrow_by_key(&q, &key)?].clone()
                }
            }
        };
        out.maps[x] = map;
    }
    check_relations(&out, &qs).map_err(|e| Error::Invariant(format!("reflected module: {e}")))?;
    Ok((out, sigma))
}

impl fmt::Display for QuiverRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dims {:?}", self.dims)
    }
}
