//! King stability on P(κ)-modules, the piecewise-linear maps T_k^± and the
//! chambers they carry along a sequence of flips.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genseed::ExchangeMatrix;
use crate::gentlerep::{submodule_dims, Walk};
use crate::linalg::{q, Q};
use crate::orbsurf::{quiver_of, QuiverWithPotential, Triangulation};
use crate::taufan::{dual_rows, FanCone};

pub type StabilityVector = Vec<Q>;

pub fn theta_from_i64(v: &[i64]) -> StabilityVector {
    v.iter().map(|&x| q(x)).collect()
}

/// θ(d) = Σ θ_i d_i.
pub fn evaluate(theta: &[Q], d: &[i64]) -> Q {
    theta.iter().zip(d).fold(Q::zero(), |acc, (t, &x)| acc + t * q(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: &Q) -> Option<Sign> {
        if x.is_positive() {
            Some(Sign::Plus)
        } else if x.is_negative() {
            Some(Sign::Minus)
        } else {
            None
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// T_k^±: θ'_k = −θ_k and θ'_i = θ_i + [±b_ik]_+ θ_k, with `b` the matrix on
/// the side θ lives on.
pub fn t_map(theta: &[Q], k: usize, sign: Sign, b: &ExchangeMatrix) -> StabilityVector {
    theta
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == k {
                -t.clone()
            } else {
                let s = match sign {
                    Sign::Plus => b.b[i][k],
                    Sign::Minus => -b.b[i][k],
                };
                t + &theta[k] * q(s.max(0))
            }
        })
        .collect()
}

/// Integer version of [`t_map`], for ray generators.
pub fn t_map_int(v: &[i64], k: usize, sign: Sign, b: &ExchangeMatrix) -> Vec<i64> {
    v.iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == k {
                -t
            } else {
                let s = match sign {
                    Sign::Plus => b.b[i][k],
                    Sign::Minus => -b.b[i][k],
                };
                t + v[k] * s.max(0)
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChamberPath {
    /// Flip indices, 0-based.
    pub flips: Vec<usize>,
    /// signs[j] is the piece of T_{flips[j]} used to carry cones[j+1] to cones[j].
    pub signs: Vec<Sign>,
    /// cones[j] lives in the coordinates of κ_j; cones[l] is the positive orthant.
    pub cones: Vec<FanCone>,
}

/// Pulls the positive orthant at the end of `flips` back to κ_0, choosing at
/// each step the piece of T_k on whose closed half-space the cone lies.
pub fn chamber_path(kappa0: &Triangulation, flips: &[usize]) -> Result<ChamberPath> {
    let mut ts = vec![kappa0.clone()];
    for &k in flips {
        let next = ts.last().unwrap().flip(k + 1)?;
        ts.push(next);
    }
    let mats: Vec<ExchangeMatrix> = ts.iter().map(|t| quiver_of(t).matrix).collect();
    for (j, &k) in flips.iter().enumerate() {
        if mats[j].mutate(k)? != mats[j + 1] {
            return Err(Error::Invariant(format!("flip {} does not mutate the exchange matrix", k + 1)));
        }
    }
    let n = kappa0.rank();
    let mut rays: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut cones = vec![FanCone { rays: rays.clone(), normals: dual_rows(&rays)? }];
    let mut signs = Vec::new();
    for j in (0..flips.len()).rev() {
        let k = flips[j];
        let interior: i64 = rays.iter().map(|r| r[k]).sum();
        let sign = Sign::of(&q(interior))
            .ok_or_else(|| Error::Invariant(format!("interior point of cone {} lies on e_{}^⊥", j + 1, k + 1)))?;
        if rays.iter().any(|r| match sign {
            Sign::Plus => r[k] < 0,
            Sign::Minus => r[k] > 0,
        }) {
            return Err(Error::Invariant(format!("cone {} straddles the hyperplane e_{}^⊥", j + 1, k + 1)));
        }
        rays = rays.iter().map(|r| t_map_int(r, k, sign, &mats[j + 1])).collect();
        let normals = dual_rows(&rays)?;
        for c in &normals {
            if c.iter().any(|&x| x > 0) == c.iter().any(|&x| x < 0) {
                return Err(Error::Invariant(format!("normal {c:?} is not sign-coherent")));
            }
        }
        signs.push(sign);
        cones.push(FanCone { rays: rays.clone(), normals });
    }
    signs.reverse();
    cones.reverse();
    Ok(ChamberPath { flips: flips.to_vec(), signs, cones })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Unstable,
    Semistable,
    Stable,
}

/// King's criterion on a string module, quantifying over its coordinate
/// submodules: θ(M) = 0 and θ(M') ≥ 0 (resp. > 0 for proper nonzero M').
pub fn semistable_string(q: &QuiverWithPotential, w: &Walk, theta: &[Q]) -> Result<Verdict> {
    let subs = submodule_dims(q, w)?;
    let verts = w.vertices(q)?;
    let mut total = vec![0i64; q.n];
    for v in verts {
        total[v] += 1;
    }
    if !evaluate(theta, &total).is_zero() {
        return Ok(Verdict::Unstable);
    }
    let mut stable = true;
    for d in subs.keys() {
        let v = evaluate(theta, d);
        if v.is_negative() {
            return Ok(Verdict::Unstable);
        }
        if v.is_zero() && d.iter().any(|&x| x != 0) && *d != total {
            stable = false;
        }
    }
    Ok(if stable { Verdict::Stable } else { Verdict::Semistable })
}

/// Text rendering: one line per stage with sign, rays and normals.
pub fn render_chambers(p: &ChamberPath) -> String {
    let mut out = format!("signs: ({})\n", p.signs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
    for (j, c) in p.cones.iter().enumerate() {
        out.push_str(&format!("C_{j}: rays {:?} normals {:?}\n", c.rays, c.normals));
    }
    out
}
