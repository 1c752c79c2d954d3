//! Support τ-tilting pairs over P(κ), AIR mutation driven by g-vectors, the
//! reachable exchange graph and the cones of the g-vector fan.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Mutex;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::read_json;
use crate::genseed::{explore_generic, ExchangeMatrix, SeedEdge};
use crate::gentlerep::{
    enumerate_strings, g_vector, modules_compatible, string_module, string_of, strings_with_dims, tau_rigid_pair,
    QuiverRep, RepJson, Walk,
};
use crate::linalg::{q, QMatrix};
use crate::orbsurf::{quiver_of, QuiverWithPotential, Triangulation};
use crate::tropical::{b_from_c_vectors, TropicalState};

/// Longest string searched when realizing g-vectors. Depth-4 pairs of the digon
/// need 16 basis points; checking exchange relations at depth 4 mutates to
/// depth 5, which needs 22.
pub const DEFAULT_MAX_STRING_LEN: usize = 21;

#[derive(Clone, Debug, PartialEq)]
pub enum Summand {
    Module(QuiverRep),
    /// (0, P_i) with a 0-based vertex.
    Shifted(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummandJson {
    Module(RepJson),
    /// 1-based vertex.
    ShiftedProjective(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairFile {
    pub kappa: usize,
    pub summands: Vec<SummandJson>,
}

/// A pair (M, P) stored slot by slot; slot i carries the summand whose
/// g-vector is `gvectors[i]`.
#[derive(Clone, Debug)]
pub struct TauRigidPair {
    pub summands: Vec<Summand>,
    pub gvectors: Vec<Vec<i64>>,
    /// AIR mutations (0-based slots) from the initial pair, when known.
    pub path: Option<Vec<usize>>,
}

impl TauRigidPair {
    pub fn module_summands(&self) -> Vec<&QuiverRep> {
        self.summands
            .iter()
            .filter_map(|s| match s {
                Summand::Module(m) => Some(m),
                Summand::Shifted(_) => None,
            })
            .collect()
    }

    pub fn projective_summands(&self) -> Vec<usize> {
        self.summands
            .iter()
            .filter_map(|s| match s {
                Summand::Shifted(i) => Some(*i),
                Summand::Module(_) => None,
            })
            .collect()
    }

    pub fn is_support_tilting(&self, n: usize) -> bool {
        self.summands.len() == n
    }

    /// Isomorphism-class key: the sorted set of g-vectors.
    pub fn key(&self) -> String {
        gkey(&self.gvectors)
    }

    pub fn from_file(f: &PairFile, q: &QuiverWithPotential) -> Result<Self> {
        let mut summands = Vec::new();
        let mut gvectors = Vec::new();
        for s in &f.summands {
            match s {
                SummandJson::Module(j) => {
                    let m = QuiverRep::from_json(q, j)?;
                    gvectors.push(g_vector(&m, q)?);
                    summands.push(Summand::Module(m));
                }
                SummandJson::ShiftedProjective(v) => {
                    if *v == 0 || *v > q.n {
                        return Err(Error::IndexOutOfRange { index: *v, n: q.n });
                    }
                    gvectors.push(unit(q.n, v - 1));
                    summands.push(Summand::Shifted(v - 1));
                }
            }
        }
        Ok(TauRigidPair { summands, gvectors, path: None })
    }

    pub fn to_file(&self, kappa: usize, q: &QuiverWithPotential) -> PairFile {
        let summands = self
            .summands
            .iter()
            .map(|s| match s {
                Summand::Module(m) => SummandJson::Module(m.to_json(q)),
                Summand::Shifted(i) => SummandJson::ShiftedProjective(i + 1),
            })
            .collect();
        PairFile { kappa, summands }
    }

    pub fn render(&self, q: &QuiverWithPotential) -> String {
        let mut out = String::new();
        for (s, g) in self.summands.iter().zip(&self.gvectors) {
            match s {
                Summand::Module(m) => {
                    let name = string_of(q, m, m.total_dim()).map_or_else(|| "?".to_string(), |w| w.render(q));
                    writeln!(out, "M({name}) dims {:?} g = {:?}", m.dims, g).unwrap()
                }
                Summand::Shifted(i) => writeln!(out, "P{}[1] g = {:?}", i + 1, g).unwrap(),
            }
        }
        out
    }
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    (0..n).map(|j| i64::from(i == j)).collect()
}

/// Loads `pairs/row{j}.json` as a pair over P(κ_j).
pub fn load_pair_row(j: usize, q: &QuiverWithPotential) -> Result<TauRigidPair> {
    let f: PairFile = read_json(&format!("pairs/row{j}.json"))?;
    TauRigidPair::from_file(&f, q)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanCone {
    pub rays: Vec<Vec<i64>>,
    pub normals: Vec<Vec<i64>>,
}

impl FanCone {
    /// λ-coordinates of an integer point in the ray basis.
    pub fn coordinates(&self, p: &[i64]) -> Vec<i64> {
        self.normals.iter().map(|c| c.iter().zip(p).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.coordinates(p).iter().all(|&x| x >= 0)
    }

    pub fn interior_point(&self) -> Vec<i64> {
        let n = self.rays.len();
        (0..n).map(|i| self.rays.iter().map(|r| r[i]).sum()).collect()
    }
}

/// Normals (rows of (Gᵀ)⁻¹) of unimodular integer rows `g`.
pub fn dual_rows(g: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = g.len();
    let gm = QMatrix::from_i64(g, n);
    let det = gm.determinant();
    if det != q(1) && det != q(-1) {
        return Err(Error::Invariant(format!("g-vectors {g:?} are not unimodular (det {det})")));
    }
    let inv = gm.transpose().inverse().expect("unimodular");
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = &inv[(i, j)];
                    v.to_integer().try_into().expect("small integer entry")
                })
                .collect()
        })
        .collect())
}

pub fn cone_of(p: &TauRigidPair) -> Result<FanCone> {
    let normals = dual_rows(&p.gvectors)?;
    for (i, c) in normals.iter().enumerate() {
        let pos = c.iter().any(|&x| x > 0);
        let neg = c.iter().any(|&x| x < 0);
        if pos == neg {
            return Err(Error::Invariant(format!("normal {} = {c:?} is not sign-coherent", i + 1)));
        }
    }
    Ok(FanCone { rays: p.gvectors.clone(), normals })
}

/// True iff some facet hyperplane of one cone weakly separates the two cones.
pub fn cones_separated(a: &FanCone, b: &FanCone) -> bool {
    let sep = |x: &FanCone, y: &FanCone| {
        x.normals.iter().any(|c| y.rays.iter().all(|r| c.iter().zip(r).map(|(u, v)| u * v).sum::<i64>() <= 0))
    };
    sep(a, b) || sep(b, a)
}

/// Number of rays two cones share.
pub fn shared_rays(a: &FanCone, b: &FanCone) -> usize {
    a.rays.iter().filter(|r| b.rays.contains(r)).count()
}

/// A summand and, for modules, the string it was found as.
type Realized = (Summand, Option<Walk>);

/// Everything AIR mutation needs about P(κ): the quiver, B(κ) and a memoized
/// string catalogue used to realize g-vectors by modules.
pub struct AirContext {
    pub triangulation: Triangulation,
    pub quiver: QuiverWithPotential,
    pub max_len: usize,
    strings: Vec<(Walk, Vec<i64>)>,
    cache: Mutex<HashMap<Vec<i64>, Realized>>,
}

fn string_top(q: &QuiverWithPotential, w: &Walk) -> Vec<i64> {
    let verts = w.vertices(q).expect("enumerated walk");
    let mut hit = vec![false; verts.len()];
    for (i, l) in w.letters.iter().enumerate() {
        hit[if l.inverse { i } else { i + 1 }] = true;
    }
    let mut top = vec![0; q.n];
    for (v, h) in verts.iter().zip(hit) {
        if !h {
            top[*v] += 1;
        }
    }
    top
}

impl AirContext {
    pub fn new(t: &Triangulation, max_len: usize) -> Result<Self> {
        t.validate()?;
        let quiver = quiver_of(t);
        quiver.gentle_audit()?;
        let strings = enumerate_strings(&quiver, max_len)
            .into_iter()
            .map(|w| {
                let top = string_top(&quiver, &w);
                (w, top)
            })
            .collect();
        Ok(AirContext { triangulation: t.clone(), quiver, max_len, strings, cache: Mutex::new(HashMap::new()) })
    }

    pub fn rank(&self) -> usize {
        self.quiver.n
    }

    pub fn root(&self) -> &ExchangeMatrix {
        &self.quiver.matrix
    }

    /// The pair (0, P(κ)); its g-vectors are the unit vectors.
    pub fn initial_pair(&self) -> TauRigidPair {
        let n = self.rank();
        TauRigidPair {
            summands: (0..n).map(Summand::Shifted).collect(),
            gvectors: (0..n).map(|i| unit(n, i)).collect(),
            path: Some(Vec::new()),
        }
    }

    /// The indecomposable τ-rigid summand with g-vector `g`.
    pub fn realize(&self, g: &[i64]) -> Result<Summand> {
        Ok(self.realize_with_walk(g, None)?.0)
    }

    /// The string realizing `g`, or `None` for a shifted projective.
    pub fn walk_for(&self, g: &[i64]) -> Result<Option<Walk>> {
        Ok(self.realize_with_walk(g, None)?.1)
    }

    /// Dimension vectors of the modules in slot order at the end of `path`,
    /// read off the top terms of the F-polynomials.
    pub fn dims_hint(&self, path: &[usize]) -> Result<Vec<Vec<i64>>> {
        let t = TropicalState::walk(self.root().clone(), path)?;
        Ok(t.f
            .iter()
            .map(|f| {
                let top = f.as_laurent().terms().keys().max_by_key(|e| e.degree()).expect("nonzero F");
                top.0.iter().map(|&x| x as i64).collect()
            })
            .collect())
    }

    /// Realizes `g`; with `dims` the search is restricted to strings of that
    /// dimension vector, otherwise all strings up to `max_len` letters are tried.
    pub fn realize_with_walk(&self, g: &[i64], dims: Option<&[i64]>) -> Result<Realized> {
        if let Some(s) = self.cache.lock().unwrap().get(g) {
            return Ok(s.clone());
        }
        let n = self.rank();
        let s = if let Some(i) = (0..n).find(|&i| g == unit(n, i).as_slice()) {
            (Summand::Shifted(i), None)
        } else {
            let want_top: Vec<i64> = g.iter().map(|&x| (-x).max(0)).collect();
            let hinted: Vec<(Walk, Vec<i64>)>;
            let pool: &[(Walk, Vec<i64>)] = match dims {
                Some(d) if d.iter().sum::<i64>() > self.max_len as i64 + 1 => {
                    return Err(Error::RealizationBound { gvector: g.to_vec(), max_len: self.max_len });
                }
                Some(d) => {
                    hinted = strings_with_dims(&self.quiver, d)
                        .into_iter()
                        .map(|w| {
                            let top = string_top(&self.quiver, &w);
                            (w, top)
                        })
                        .collect();
                    &hinted
                }
                None => &self.strings,
            };
            let mut found = Vec::new();
            for (w, top) in pool {
                if *top != want_top {
                    continue;
                }
                let m = string_module(&self.quiver, w)?;
                if g_vector(&m, &self.quiver)? == g && tau_rigid_pair(&m, &[], &self.quiver)? {
                    found.push((m, w.clone()));
                }
            }
            match found.len() {
                0 if dims.is_some() => return self.realize_with_walk(g, None),
                0 => return Err(Error::RealizationBound { gvector: g.to_vec(), max_len: self.max_len }),
                1 => {
                    let (m, w) = found.pop().unwrap();
                    (Summand::Module(m), Some(w))
                }
                k => return Err(Error::Invariant(format!("{k} non-isomorphic τ-rigid strings share g-vector {g:?}"))),
            }
        };
        self.cache.lock().unwrap().insert(g.to_vec(), s.clone());
        Ok(s)
    }

    /// Exchange matrix at the node of `p`, rebuilt from its normals.
    pub fn matrix_at(&self, p: &TauRigidPair) -> Result<ExchangeMatrix> {
        let c = dual_rows(&p.gvectors)?;
        Ok(ExchangeMatrix { b: b_from_c_vectors(self.root(), &c), r: self.root().r.clone() })
    }

    /// g-vectors after mutating slot `k`, from the ray recursion with B(t)
    /// rebuilt from the normals.
    pub fn mutate_gvectors(&self, g: &[Vec<i64>], k: usize) -> Result<Vec<Vec<i64>>> {
        let n = self.rank();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        let normals = dual_rows(g)?;
        let b = b_from_c_vectors(self.root(), &normals);
        let sgn = if normals[k].iter().any(|&x| x > 0) { 1 } else { -1 };
        let mut gk: Vec<i64> = g[k].iter().map(|x| -x).collect();
        for i in 0..n {
            let w = (-sgn * b[i][k]).max(0);
            for (x, y) in gk.iter_mut().zip(&g[i]) {
                *x += w * y;
            }
        }
        let mut out = g.to_vec();
        out[k] = gk;
        Ok(out)
    }

    /// Replaces slot `k` by the other completion of the almost complete pair.
    pub fn mutate(&self, p: &TauRigidPair, k: usize) -> Result<TauRigidPair> {
        let gvectors = self.mutate_gvectors(&p.gvectors, k)?;
        let path = p.path.clone().map(|mut v| {
            v.push(k);
            v
        });
        let hint = match &path {
            Some(v) => Some(self.dims_hint(v)?.swap_remove(k)),
            None => None,
        };
        let mut out = p.clone();
        out.summands[k] = self.realize_with_walk(&gvectors[k], hint.as_deref())?.0;
        out.gvectors = gvectors;
        out.path = path;
        self.verify(&out)?;
        Ok(out)
    }

    pub fn mutate_path(&self, p: &TauRigidPair, path: &[usize]) -> Result<TauRigidPair> {
        path.iter().try_fold(p.clone(), |acc, &k| self.mutate(&acc, k))
    }

    /// Checks τ-rigidity of every summand and pair of summands, and that the
    /// g-vectors are those of the summands and form a basis.
    pub fn verify(&self, p: &TauRigidPair) -> Result<()> {
        let q = &self.quiver;
        let proj = p.projective_summands();
        let mods = p.module_summands();
        for (s, g) in p.summands.iter().zip(&p.gvectors) {
            let actual = match s {
                Summand::Module(m) => g_vector(m, q)?,
                Summand::Shifted(i) => unit(q.n, *i),
            };
            if actual != *g {
                return Err(Error::Invariant(format!("summand g-vector {actual:?} differs from recorded {g:?}")));
            }
        }
        for m in &mods {
            if !tau_rigid_pair(m, &proj, q)? {
                return Err(Error::Invariant(format!("summand with dims {:?} is not τ-rigid in the pair", m.dims)));
            }
        }
        for (a, b) in mods.iter().tuple_combinations() {
            if !modules_compatible(a, b, q)? {
                return Err(Error::Invariant(format!("summands {:?} and {:?} are not compatible", a.dims, b.dims)));
            }
        }
        if proj.iter().collect::<BTreeSet<_>>().len() != proj.len() {
            return Err(Error::Invariant("repeated projective summand".into()));
        }
        dual_rows(&p.gvectors)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct StauGraph {
    /// (pair, key, depth)
    pub nodes: Vec<(TauRigidPair, String, usize)>,
    pub edges: Vec<SeedEdge>,
}

impl StauGraph {
    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.nodes.iter().position(|(_, k, _)| k == key)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph stau {\n");
        for (i, (p, _, _)) in self.nodes.iter().enumerate() {
            let label = p.gvectors.iter().map(|g| format!("{g:?}")).join("\\n");
            writeln!(s, "  n{i} [label=\"{label}\"];").unwrap();
        }
        for e in &self.edges {
            writeln!(s, "  n{} -- n{} [label=\"{}\"];", e.a, e.b, e.ka + 1).unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn gkey(g: &[Vec<i64>]) -> String {
    g.iter().sorted().map(|v| format!("{v:?}")).join(" ")
}

/// Breadth-first AIR mutation from `start`; nodes are identified by their
/// g-vector sets. The search runs on g-vectors, and summands are realized
/// only for the nodes kept.
pub fn stau_exchange_graph(ctx: &AirContext, start: &TauRigidPair, depth: usize, jobs: usize) -> Result<StauGraph> {
    ctx.verify(start)?;
    type Node = (Vec<Vec<i64>>, Vec<usize>);
    let start_path =
        start.path.clone().ok_or_else(|| Error::Unsupported("exploration needs a pair with known path".into()))?;
    let (nodes, edges) = explore_generic(
        (start.gvectors.clone(), start_path),
        depth,
        jobs,
        ctx.rank(),
        |(g, path): &Node, k| {
            let m = ctx.mutate_gvectors(g, k)?;
            let mut path = path.clone();
            path.push(k);
            Ok((gkey(&m), (m, path), k))
        },
        |(g, _)| gkey(g),
    )?;
    let nodes = nodes
        .into_iter()
        .map(|((gvectors, path), key, d)| {
            let hints = ctx.dims_hint(&path)?;
            let summands = gvectors
                .iter()
                .zip(&hints)
                .map(|(g, d)| Ok(ctx.realize_with_walk(g, Some(d))?.0))
                .collect::<Result<_>>()?;
            let p = TauRigidPair { summands, gvectors, path: Some(path) };
            ctx.verify(&p)?;
            Ok((p, key, d))
        })
        .collect::<Result<_>>()?;
    Ok(StauGraph { nodes, edges })
}

/// Every pair of explored cones is separated by a facet hyperplane and
/// adjacent cones share exactly n − 1 rays.
pub fn check_fan(g: &StauGraph) -> Result<()> {
    let cones: Vec<FanCone> = g.nodes.iter().map(|(p, _, _)| cone_of(p)).collect::<Result<_>>()?;
    let n = cones.first().map_or(0, |c| c.rays.len());
    for (i, j) in (0..cones.len()).tuple_combinations() {
        if !cones_separated(&cones[i], &cones[j]) {
            return Err(Error::Invariant(format!("cones {i} and {j} are not separated by a facet")));
        }
        for (x, y) in [(i, j), (j, i)] {
            let coords = cones[y].coordinates(&cones[x].interior_point());
            if coords.iter().all(|&c| c > 0) {
                return Err(Error::Invariant(format!("interior of cone {x} meets cone {y}")));
            }
        }
    }
    for e in &g.edges {
        if shared_rays(&cones[e.a], &cones[e.b]) + 1 != n {
            return Err(Error::Invariant(format!("adjacent cones {} and {} do not share a facet", e.a, e.b)));
        }
    }
    Ok(())
}
