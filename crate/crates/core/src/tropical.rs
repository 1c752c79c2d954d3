//! c-vectors, g-vectors and F-polynomials along a path in the n-regular tree.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genseed::{hat_y, ExchangeMatrix, GenSeed, ThetaCoeffs};
use crate::linalg::{q, QMatrix};
use crate::symbolic::{substitute_monomials, LaurentPoly, YPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropicalState {
    /// Mutation indices (0-based) applied from the root.
    pub path: Vec<usize>,
    /// Rows are the c-vectors.
    pub c: Vec<Vec<i64>>,
    /// Rows are the g-vectors.
    pub g: Vec<Vec<i64>>,
    #[serde(skip)]
    pub f: Vec<YPoly>,
    /// Exchange matrix at the current vertex.
    pub b: ExchangeMatrix,
    /// Exchange matrix at the root.
    pub root: ExchangeMatrix,
    pub theta: ThetaCoeffs,
}

fn pos(x: i64) -> i64 {
    x.max(0)
}

impl TropicalState {
    pub fn initial(root: ExchangeMatrix) -> Result<Self> {
        let theta = ThetaCoeffs::all_ones(&root.r);
        Self::with_theta(root, theta)
    }

    pub fn with_theta(root: ExchangeMatrix, theta: ThetaCoeffs) -> Result<Self> {
        root.validate()?;
        theta.validate(&root.r)?;
        let n = root.rank();
        let id: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        Ok(TropicalState {
            path: Vec::new(),
            c: id.clone(),
            g: id,
            f: vec![YPoly::one(n); n],
            b: root.clone(),
            root,
            theta,
        })
    }

    pub fn rank(&self) -> usize {
        self.c.len()
    }

    pub fn walk(root: ExchangeMatrix, path: &[usize]) -> Result<Self> {
        path.iter().try_fold(Self::initial(root)?, |s, &k| tropical_step(&s, k))
    }

    /// Sign of a c-row; errors on a zero or mixed-sign row.
    pub fn sign(&self, i: usize) -> Result<i64> {
        let row = &self.c[i];
        if row.iter().all(|&v| v >= 0) && row.iter().any(|&v| v > 0) {
            Ok(1)
        } else if row.iter().all(|&v| v <= 0) && row.iter().any(|&v| v < 0) {
            Ok(-1)
        } else {
            Err(Error::Invariant(format!("c-vector {} = {:?} is not sign-coherent", i + 1, row)))
        }
    }

    /// Cluster variable x^{g_j} F_j(ŷ) in the root cluster.
    pub fn separated(&self, j: usize) -> Result<LaurentPoly> {
        let n = self.rank();
        let images: Vec<LaurentPoly> = (0..n).map(|i| hat_y(&self.root, i)).collect::<Result<_>>()?;
        let f = substitute_monomials(&self.f[j], &images)?;
        Ok(&f * &LaurentPoly::x_pow(&self.g[j]))
    }

    /// b_ij(t) recomputed from c-vectors against the root matrix.
    pub fn b_from_c(&self) -> Vec<Vec<i64>> {
        b_from_c_vectors(&self.root, &self.c)
    }

    /// Checks sign-coherence, unimodularity of G, duality of C and G, and B(t) from c-vectors.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.rank();
        for i in 0..n {
            self.sign(i)?;
            if self.f[i].constant_term() != BigInt::from(1) {
                return Err(Error::Invariant(format!("F_{} has constant term {}", i + 1, self.f[i].constant_term())));
            }
        }
        let gm = QMatrix::from_i64(&self.g, n);
        let det = gm.determinant();
        if det != q(1) && det != q(-1) {
            return Err(Error::Invariant(format!("g-vectors have determinant {det}")));
        }
        let cm = QMatrix::from_i64(&self.c, n);
        if cm.mul(&gm.transpose()) != QMatrix::identity(n) {
            return Err(Error::Invariant("c-vectors are not dual to g-vectors".into()));
        }
        if self.b_from_c() != self.b.b {
            return Err(Error::Invariant("exchange matrix differs from its c-vector reconstruction".into()));
        }
        Ok(())
    }
}

/// b_ij = c_i · B̄ · (r_j c_j)^T, with B̄ = B D^{-1} of the root matrix.
pub fn b_from_c_vectors(root: &ExchangeMatrix, c: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = c.len();
    let r = &root.r;
    let mut out = vec![vec![0; n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = 0;
            for a in 0..n {
                for b in 0..n {
                    acc += c[i][a] * root.bbar(a, b) * r[j] * c[j][b];
                }
            }
            *v = acc;
        }
    }
    out
}

/// One step of the c/g/F recursions together with matrix mutation.
pub fn tropical_step(s: &TropicalState, k: usize) -> Result<TropicalState> {
    let n = s.rank();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let b = &s.b.b;
    let r = &s.b.r;
    let ck = s.c[k].clone();
    s.sign(k)?;

    let mut c = s.c.clone();
    for i in 0..n {
        if i == k {
            c[i] = ck.iter().map(|v| -v).collect();
            continue;
        }
        let coef = r[k] * b[k][i];
        if coef % r[i] != 0 {
            return Err(Error::Invariant(format!("r_{}/r_{} b_{},{} is not integral", k + 1, i + 1, k + 1, i + 1)));
        }
        let coef = coef / r[i];
        for (cv, &kv) in c[i].iter_mut().zip(&ck) {
            *cv += coef * if b[i][k] > 0 { pos(-kv) } else { pos(kv) };
        }
    }

    let mut g = s.g.clone();
    let mut gk: Vec<i64> = s.g[k].iter().map(|v| -v).collect();
    for j in 0..n {
        let w = pos(b[j][k]);
        if w != 0 {
            for (x, y) in gk.iter_mut().zip(&s.g[j]) {
                *x += w * y;
            }
        }
    }
    for j in 0..n {
        let w = r[k] * pos(ck[j]);
        if w == 0 {
            continue;
        }
        if w % r[j] != 0 {
            return Err(Error::Invariant(format!("r_{}/r_{} c is not integral", k + 1, j + 1)));
        }
        for (i, x) in gk.iter_mut().enumerate() {
            *x -= w / r[j] * s.root.b[i][j];
        }
    }
    g[k] = gk;

    let mut u = LaurentPoly::x_pow(&ck.iter().map(|&v| pos(v)).collect::<Vec<_>>());
    let mut v = LaurentPoly::x_pow(&ck.iter().map(|&v| pos(-v)).collect::<Vec<_>>());
    for i in 0..n {
        let e = b[i][k] / r[k];
        if e > 0 {
            u = &u * &s.f[i].as_laurent().pow(e as u32);
        } else if e < 0 {
            v = &v * &s.f[i].as_laurent().pow((-e) as u32);
        }
    }
    let rhs = s.theta.eval(k, &u, &v);
    let fk =
        rhs.divexact(s.f[k].as_laurent()).map_err(|e| Error::Invariant(format!("F-recursion at {}: {e}", k + 1)))?;
    let mut f = s.f.clone();
    f[k] = YPoly::from_laurent(fk)?;

    let mut path = s.path.clone();
    path.push(k);
    Ok(TropicalState { path, c, g, f, b: s.b.mutate(k)?, root: s.root.clone(), theta: s.theta.clone() })
}

/// True iff every cluster variable of `seed` equals x^{g_j} F_j(ŷ).
pub fn verify_separation(s: &TropicalState, seed: &GenSeed) -> bool {
    if seed.rank() != s.rank() || seed.matrix != s.b {
        return false;
    }
    (0..s.rank()).all(|j| s.separated(j).map(|x| x == seed.cluster[j]).unwrap_or(false))
}

/// Text tables of c, g and F, one row per index.
pub fn render_tables(s: &TropicalState) -> String {
    let fmt = |v: &[i64]| format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    let path: Vec<String> = s.path.iter().map(|k| (k + 1).to_string()).collect();
    let mut out = format!("path: {}\n", if path.is_empty() { "-".to_string() } else { path.join(",") });
    for i in 0..s.rank() {
        out.push_str(&format!("c{} = {}\n", i + 1, fmt(&s.c[i])));
    }
    for i in 0..s.rank() {
        out.push_str(&format!("g{} = {}\n", i + 1, fmt(&s.g[i])));
    }
    for i in 0..s.rank() {
        out.push_str(&format!("F{} = {}\n", i + 1, s.f[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b0() -> ExchangeMatrix {
        ExchangeMatrix::new(vec![vec![0, -1, 0], vec![2, 0, -2], vec![0, 1, 0]], vec![2, 1, 2]).unwrap()
    }

    #[test]
    fn first_step_negates_ck() {
        for k in 0..3 {
            let s = TropicalState::walk(b0(), &[k]).unwrap();
            for i in 0..3 {
                let mut e = vec![0; 3];
                e[i] = if i == k { -1 } else { 1 };
                if i != k {
                    let m = b0();
                    e[k] += m.r[k] * m.b[k][i].max(0) / m.r[i];
                }
                assert_eq!(s.c[i], e);
            }
        }
    }

    #[test]
    fn single_pending_step() {
        let s = TropicalState::walk(b0(), &[0]).unwrap();
        assert_eq!(s.g[0], vec![-1, 0, 0]);
        assert_eq!(s.f[0].render(), "y1^2 + y1 + 1");
        let seed = GenSeed::initial(b0()).unwrap().mutate(0).unwrap();
        assert!(verify_separation(&s, &seed));
    }

    #[test]
    fn invariants_along_paths() {
        let s = TropicalState::walk(b0(), &[0, 2, 1, 2, 0, 1]).unwrap();
        let mut t = TropicalState::initial(b0()).unwrap();
        t.check_invariants().unwrap();
        for &k in &s.path {
            t = tropical_step(&t, k).unwrap();
            t.check_invariants().unwrap();
        }
    }
}
