//! Combinatorial triangulations of unpunctured surfaces with order-3 orbifold
//! points, their flips, and the gentle quiver with potential they determine.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genseed::{explore_generic, ExchangeMatrix, SeedEdge};
use crate::symbolic::LaurentPoly;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Arc(usize),
    Boundary(String),
}

impl Side {
    pub fn arc(&self) -> Option<usize> {
        match self {
            Side::Arc(a) => Some(*a),
            Side::Boundary(_) => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Arc(a) => write!(f, "{a}"),
            Side::Boundary(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Triangle {
    /// Sides in clockwise cyclic order.
    NonSingular { sides: [Side; 3] },
    /// Monogon around an orbifold point, bounded by a pending arc.
    Singular { side: Side },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArcInfo {
    pub id: usize,
    #[serde(default)]
    pub pending: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangulation {
    pub arcs: Vec<ArcInfo>,
    #[serde(default)]
    pub boundary: Vec<String>,
    pub triangles: Vec<Triangle>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    ArcIdsNotContiguous,
    DuplicateArc(usize),
    DuplicateBoundary(String),
    UnknownArc(usize),
    UnknownBoundary(String),
    SingularSideNotArc(usize),
    SingularSideNotPending(usize),
    PendingArcMultiplicity { arc: usize, count: usize },
    PendingArcSlots { arc: usize, count: usize },
    ArcSlots { arc: usize, count: usize },
    BoundarySlots { name: String, count: usize },
    TooManyPendingSides(usize),
    RepeatedSide { triangle: usize, side: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::ArcIdsNotContiguous => write!(f, "arc ids must be exactly 1..n"),
            Diagnostic::DuplicateArc(a) => write!(f, "arc {a} declared twice"),
            Diagnostic::DuplicateBoundary(b) => write!(f, "boundary segment {b} declared twice"),
            Diagnostic::UnknownArc(a) => write!(f, "unknown arc {a}"),
            Diagnostic::UnknownBoundary(b) => write!(f, "unknown boundary segment {b}"),
            Diagnostic::SingularSideNotArc(t) => write!(f, "singular triangle {t} is bounded by a boundary segment"),
            Diagnostic::SingularSideNotPending(a) => write!(f, "singular triangle bounded by non-pending arc {a}"),
            Diagnostic::PendingArcMultiplicity { arc, count } => {
                write!(f, "pending arc multiplicity: arc {arc} bounds {count} singular triangles")
            }
            Diagnostic::PendingArcSlots { arc, count } => {
                write!(f, "pending arc {arc} is a side of {count} non-singular triangle slots (expected 1)")
            }
            Diagnostic::ArcSlots { arc, count } => {
                write!(f, "arc {arc} is a side of {count} triangle slots (expected 2)")
            }
            Diagnostic::BoundarySlots { name, count } => {
                write!(f, "boundary segment {name} is a side of {count} triangles (expected 1)")
            }
            Diagnostic::TooManyPendingSides(t) => write!(f, "non-singular triangle {t} has three pending sides"),
            Diagnostic::RepeatedSide { triangle, side } => {
                write!(f, "degenerate gluing: triangle {triangle} uses side {side} twice")
            }
        }
    }
}

impl Triangulation {
    pub fn rank(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_pending(&self, arc: usize) -> bool {
        self.arcs.iter().any(|a| a.id == arc && a.pending)
    }

    pub fn validate(&self) -> Result<()> {
        let diags = self.diagnostics();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Triangulation(diags))
        }
    }

    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.arcs.len();
        let mut seen = BTreeMap::new();
        for a in &self.arcs {
            if seen.insert(a.id, a.pending).is_some() {
                out.push(Diagnostic::DuplicateArc(a.id));
            }
        }
        if seen.keys().copied().ne(1..=n) && out.is_empty() {
            out.push(Diagnostic::ArcIdsNotContiguous);
        }
        let mut bseen = BTreeMap::new();
        for b in &self.boundary {
            if bseen.insert(b.clone(), 0usize).is_some() {
                out.push(Diagnostic::DuplicateBoundary(b.clone()));
            }
        }
        let mut arc_slots: BTreeMap<usize, usize> = seen.keys().map(|&a| (a, 0)).collect();
        let mut bcount: BTreeMap<String, usize> = bseen.clone();
        let mut singular: BTreeMap<usize, usize> = BTreeMap::new();
        let check_side = |s: &Side, out: &mut Vec<Diagnostic>| match s {
            Side::Arc(a) if !seen.contains_key(a) => {
                out.push(Diagnostic::UnknownArc(*a));
                false
            }
            Side::Boundary(b) if !bseen.contains_key(b) => {
                out.push(Diagnostic::UnknownBoundary(b.clone()));
                false
            }
            _ => true,
        };
        for (t, tri) in self.triangles.iter().enumerate() {
            match tri {
                Triangle::NonSingular { sides } => {
                    for s in sides {
                        if check_side(s, &mut out) {
                            match s {
                                Side::Arc(a) => *arc_slots.get_mut(a).unwrap() += 1,
                                Side::Boundary(b) => *bcount.get_mut(b).unwrap() += 1,
                            }
                        }
                    }
                    if let Some(s) = sides.iter().duplicates().next() {
                        out.push(Diagnostic::RepeatedSide { triangle: t + 1, side: s.to_string() });
                    }
                    let pend = sides.iter().filter(|s| s.arc().is_some_and(|a| seen.get(&a) == Some(&true))).count();
                    if pend == 3 {
                        out.push(Diagnostic::TooManyPendingSides(t + 1));
                    }
                }
                Triangle::Singular { side } => {
                    if !check_side(side, &mut out) {
                        continue;
                    }
                    match side {
                        Side::Boundary(_) => out.push(Diagnostic::SingularSideNotArc(t + 1)),
                        Side::Arc(a) => {
                            if seen.get(a) != Some(&true) {
                                out.push(Diagnostic::SingularSideNotPending(*a));
                            }
                            *singular.entry(*a).or_default() += 1;
                        }
                    }
                }
            }
        }
        for (&a, &pending) in &seen {
            let slots = arc_slots[&a];
            if pending {
                let s = singular.get(&a).copied().unwrap_or(0);
                if s != 1 {
                    out.push(Diagnostic::PendingArcMultiplicity { arc: a, count: s });
                }
                if slots != 1 {
                    out.push(Diagnostic::PendingArcSlots { arc: a, count: slots });
                }
            } else if slots != 2 {
                out.push(Diagnostic::ArcSlots { arc: a, count: slots });
            }
        }
        for (b, &count) in &bcount {
            if count != 1 {
                out.push(Diagnostic::BoundarySlots { name: b.clone(), count });
            }
        }
        out
    }

    /// Non-singular triangle slots containing `arc`, each rotated to start at it.
    pub(crate) fn slots_of(&self, arc: usize) -> Vec<(usize, [Side; 3])> {
        self.triangles
            .iter()
            .enumerate()
            .filter_map(|(t, tri)| match tri {
                Triangle::NonSingular { sides } => {
                    let pos = sides.iter().position(|s| *s == Side::Arc(arc))?;
                    Some((t, rotate(sides, pos)))
                }
                Triangle::Singular { .. } => None,
            })
            .collect()
    }

    /// Flip at arc `k` (1-based id).
    pub fn flip(&self, k: usize) -> Result<Triangulation> {
        self.validate()?;
        if !self.arcs.iter().any(|a| a.id == k) {
            return Err(Error::FlipNotArc(k.to_string()));
        }
        let mut out = self.clone();
        let slots = self.slots_of(k);
        if self.is_pending(k) {
            let (t, [kk, x1, x2]) = slots[0].clone();
            out.triangles[t] = Triangle::NonSingular { sides: [kk, x2, x1] };
        } else {
            let (t1, [k1, x1, x2]) = slots[0].clone();
            let (t2, [_, x3, x4]) = slots[1].clone();
            out.triangles[t1] = Triangle::NonSingular { sides: [k1.clone(), x2, x3] };
            out.triangles[t2] = Triangle::NonSingular { sides: [k1, x4, x1] };
        }
        Ok(out)
    }

    pub fn flip_path(&self, path: &[usize]) -> Result<Triangulation> {
        path.iter().try_fold(self.clone(), |t, &k| t.flip(k))
    }

    /// Gluing data independent of triangle order and side rotation.
    pub fn canonical(&self) -> Vec<Triangle> {
        let mut tris: Vec<Triangle> = self
            .triangles
            .iter()
            .map(|t| match t {
                Triangle::NonSingular { sides } => {
                    let best = (0..3).map(|i| rotate(sides, i)).min().unwrap();
                    Triangle::NonSingular { sides: best }
                }
                s => s.clone(),
            })
            .collect();
        tris.sort_by_key(|t| format!("{t:?}"));
        tris
    }

    pub fn same_gluing(&self, other: &Triangulation) -> bool {
        self.arcs.iter().sorted_by_key(|a| a.id).eq(other.arcs.iter().sorted_by_key(|a| a.id))
            && self.canonical() == other.canonical()
    }

    pub fn quiver(&self) -> Result<QuiverWithPotential> {
        self.validate()?;
        Ok(quiver_of(self))
    }
}

fn rotate(sides: &[Side; 3], pos: usize) -> [Side; 3] {
    [sides[pos].clone(), sides[(pos + 1) % 3].clone(), sides[(pos + 2) % 3].clone()]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArrowKind {
    Loop,
    /// Arrow inside a non-singular triangle; `third` is the side it skips.
    Triangle {
        third: Side,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub kind: ArrowKind,
}

/// Length-2 relation: `M_then ∘ M_first = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub first: usize,
    pub then: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PotentialTerm {
    Cycle([usize; 3]),
    LoopCube(usize),
}

/// Q(κ) with potential; vertex i is arc i+1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverWithPotential {
    pub n: usize,
    pub pending: Vec<bool>,
    pub arrows: Vec<Arrow>,
    pub potential: Vec<PotentialTerm>,
    pub relations: Vec<Relation>,
    pub matrix: ExchangeMatrix,
}

impl QuiverWithPotential {
    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.id == id)
    }

    pub fn loop_at(&self, v: usize) -> Option<usize> {
        self.arrows.iter().position(|a| a.kind == ArrowKind::Loop && a.tail == v)
    }

    pub fn find(&self, tail: usize, head: usize, third: Option<&Side>) -> Option<usize> {
        self.arrows.iter().position(|a| {
            a.tail == tail
                && a.head == head
                && match (&a.kind, third) {
                    (ArrowKind::Loop, None) => true,
                    (ArrowKind::Triangle { third: t }, Some(s)) => t == s,
                    _ => false,
                }
        })
    }

    pub fn is_relation(&self, first: usize, then: usize) -> bool {
        self.relations.contains(&Relation { first, then })
    }

    pub fn incoming(&self, v: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].head == v && self.arrows[a].kind != ArrowKind::Loop).collect()
    }

    pub fn outgoing(&self, v: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].tail == v && self.arrows[a].kind != ArrowKind::Loop).collect()
    }

    /// The four local conditions of a gentle bound quiver.
    pub fn gentle_audit(&self) -> Result<()> {
        for v in 0..self.n {
            let inc = self.arrows.iter().filter(|a| a.head == v).count();
            let out = self.arrows.iter().filter(|a| a.tail == v).count();
            if inc > 2 || out > 2 {
                return Err(Error::NotGentle(format!("vertex {} has {inc} incoming and {out} outgoing arrows", v + 1)));
            }
        }
        for (b, arrow) in self.arrows.iter().enumerate() {
            let before = (0..self.arrows.len()).filter(|&a| self.arrows[a].head == arrow.tail);
            let (rel_before, free_before): (Vec<usize>, Vec<usize>) = before.partition(|&a| self.is_relation(a, b));
            let after = (0..self.arrows.len()).filter(|&c| self.arrows[c].tail == arrow.head);
            let (rel_after, free_after): (Vec<usize>, Vec<usize>) = after.partition(|&c| self.is_relation(b, c));
            if rel_before.len() > 1 || rel_after.len() > 1 {
                return Err(Error::NotGentle(format!("arrow {} lies in more than one relation on a side", arrow.id)));
            }
            if free_before.len() > 1 || free_after.len() > 1 {
                return Err(Error::NotGentle(format!(
                    "arrow {} has more than one relation-free continuation",
                    arrow.id
                )));
            }
        }
        Ok(())
    }
}

/// Quiver with potential, relations and B(κ) = B̄D.
pub fn quiver_of(t: &Triangulation) -> QuiverWithPotential {
    let n = t.rank();
    let pending: Vec<bool> = (1..=n).map(|a| t.is_pending(a)).collect();
    // (tail, head, third, triangle index, position)
    let mut raw: Vec<(usize, usize, Side, usize, usize)> = Vec::new();
    let mut internal = Vec::new();
    for (ti, tri) in t.triangles.iter().enumerate() {
        if let Triangle::NonSingular { sides } = tri {
            for p in 0..3 {
                let (s, nxt, third) = (&sides[p], &sides[(p + 1) % 3], &sides[(p + 2) % 3]);
                if let (Some(a), Some(b)) = (s.arc(), nxt.arc()) {
                    raw.push((a - 1, b - 1, third.clone(), ti, p));
                }
            }
            if sides.iter().all(|s| s.arc().is_some()) {
                internal.push(ti);
            }
        }
    }
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for r in &raw {
        *counts.entry((r.0, r.1)).or_default() += 1;
    }
    raw.sort_by(|x, y| (x.0, x.1, &x.2).cmp(&(y.0, y.1, &y.2)));
    let mut arrows: Vec<Arrow> = raw
        .iter()
        .map(|(a, b, third, _, _)| {
            let id = if counts[&(*a, *b)] > 1 {
                format!("{}-{}/{}", a + 1, b + 1, third)
            } else {
                format!("{}-{}", a + 1, b + 1)
            };
            Arrow { id, tail: *a, head: *b, kind: ArrowKind::Triangle { third: third.clone() } }
        })
        .collect();
    for v in 0..n {
        if pending[v] {
            arrows.push(Arrow { id: format!("e{}", v + 1), tail: v, head: v, kind: ArrowKind::Loop });
        }
    }
    let mut potential = Vec::new();
    let mut relations = Vec::new();
    for ti in internal {
        let idx: Vec<usize> = (0..3).map(|p| raw.iter().position(|x| x.3 == ti && x.4 == p).unwrap()).collect();
        potential.push(PotentialTerm::Cycle([idx[0], idx[1], idx[2]]));
        for p in 0..3 {
            relations.push(Relation { first: idx[p], then: idx[(p + 1) % 3] });
        }
    }
    for v in 0..n {
        if pending[v] {
            let e = arrows.iter().position(|a| a.kind == ArrowKind::Loop && a.tail == v).unwrap();
            potential.push(PotentialTerm::LoopCube(e));
            relations.push(Relation { first: e, then: e });
        }
    }
    relations.sort();
    let mut b = vec![vec![0i64; n]; n];
    for a in &arrows {
        if a.kind != ArrowKind::Loop {
            b[a.tail][a.head] += 1;
            b[a.head][a.tail] -= 1;
        }
    }
    let d: Vec<i64> = pending.iter().map(|&p| if p { 2 } else { 1 }).collect();
    for row in b.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= d[j];
        }
    }
    let matrix = ExchangeMatrix { b, r: d };
    QuiverWithPotential { n, pending, arrows, potential, relations, matrix }
}

/// Exchange relation read off the triangulation: x_k x_k' equals a binomial
/// (non-pending k) or a trinomial (pending k) in the neighbouring arcs.
pub fn exchange_rhs(q: &QuiverWithPotential, labels: &[LaurentPoly], k: usize) -> LaurentPoly {
    let nx = labels[0].nvars();
    let col: Vec<i64> = (0..q.n).map(|j| q.matrix.b[j][k]).collect();
    let prod = |pred: &dyn Fn(i64) -> Option<u32>| {
        let mut p = LaurentPoly::one(nx);
        for (j, &bj) in col.iter().enumerate() {
            if let Some(e) = pred(bj) {
                p = &p * &labels[j].pow(e);
            }
        }
        p
    };
    if q.pending[k] {
        let neg = prod(&|b| (b < 0).then_some(1));
        let pos = prod(&|b| (b > 0).then_some(1));
        let sq_neg = neg.pow(2);
        let sq_pos = pos.pow(2);
        &(&sq_neg + &(&pos * &neg)) + &sq_pos
    } else {
        let neg = prod(&|b| (b < 0).then_some((-b) as u32));
        let pos = prod(&|b| (b > 0).then_some(b as u32));
        &neg + &pos
    }
}

#[derive(Clone, Debug)]
pub struct FlipState {
    pub triangulation: Triangulation,
    /// Global identity of each arc, as a Laurent polynomial in the initial arcs.
    pub labels: Vec<LaurentPoly>,
}

impl FlipState {
    pub fn initial(t: &Triangulation) -> Result<Self> {
        t.validate()?;
        let n = t.rank();
        Ok(FlipState { triangulation: t.clone(), labels: (0..n).map(|i| LaurentPoly::var(n, i)).collect() })
    }

    pub fn flip(&self, k: usize) -> Result<FlipState> {
        let q = quiver_of(&self.triangulation);
        let rhs = exchange_rhs(&q, &self.labels, k);
        let mut labels = self.labels.clone();
        labels[k] = rhs.divexact(&self.labels[k])?;
        Ok(FlipState { triangulation: self.triangulation.flip(k + 1)?, labels })
    }

    fn sorted_labels(&self) -> Vec<String> {
        self.labels.iter().map(|p| p.render("x")).sorted().collect()
    }

    pub fn key(&self) -> String {
        self.sorted_labels().join(" | ")
    }
}

#[derive(Clone, Debug, Default)]
pub struct FlipGraph {
    pub nodes: Vec<(FlipState, usize)>,
    pub edges: Vec<SeedEdge>,
}

/// Breadth-first flip graph; triangulations are identified when they consist
/// of the same arcs, arcs being tracked through their exchange labels. Edge
/// labels are arc ids minus one (the flipped arc keeps its label).
pub fn flip_graph(t0: &Triangulation, depth: usize, jobs: usize) -> Result<FlipGraph> {
    let start = FlipState::initial(t0)?;
    let n = t0.rank();
    let (nodes, edges) = explore_generic(
        start,
        depth,
        jobs,
        n,
        |s: &FlipState, k| {
            let f = s.flip(k)?;
            Ok((f.key(), f, k))
        },
        |s| s.key(),
    )?;
    Ok(FlipGraph { nodes: nodes.into_iter().map(|(s, _, d)| (s, d)).collect(), edges })
}
