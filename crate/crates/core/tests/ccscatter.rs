use num_bigint::BigInt;

use orbicluster::ccscatter::*;
use orbicluster::fixtures::{digon, DIGON_PATH};
use orbicluster::genseed::ExchangeMatrix;
use orbicluster::gentlerep::Walk;
use orbicluster::symbolic::{ExpVector, LaurentPoly, YPoly};
use orbicluster::taufan::{load_pair_row, AirContext, DEFAULT_MAX_STRING_LEN};
use orbicluster::tropical::TropicalState;
use orbicluster::{quiver_of, QuiverWithPotential};

fn poly(terms: &[(i64, [i64; 3])]) -> LaurentPoly {
    let mut p = LaurentPoly::zero(3);
    for (c, e) in terms {
        p.add_term(ExpVector::from_i64(e), BigInt::from(*c));
    }
    p
}

fn q0() -> QuiverWithPotential {
    quiver_of(&digon(0).unwrap())
}

const M1: &str = "@1 e1";
const M2: &str = "@3 e3 3-2 2-1 e1";
const M3: &str = "@1 e1^-1 2-1^-1 3-2^-1 e3 3-2 2-1 e1";
const N: &str = "@3 e3";

fn walk(q: &QuiverWithPotential, s: &str) -> Walk {
    Walk::parse(q, s).unwrap()
}

fn final_state() -> TropicalState {
    let path: Vec<usize> = DIGON_PATH.iter().map(|k| k - 1).collect();
    TropicalState::walk(q0().matrix, &path).unwrap()
}

#[test]
fn walks_match_reference_modules() {
    let q = q0();
    let ctx = AirContext::new(&digon(0).unwrap(), DEFAULT_MAX_STRING_LEN).unwrap();
    let row = load_pair_row(0, &q).unwrap();
    for (i, w) in [M1, M2, M3].iter().enumerate() {
        assert_eq!(ctx.walk_for(&row.gvectors[i]).unwrap().unwrap(), walk(&q, w).canonical(&q).unwrap());
    }
}

#[test]
fn f_polynomials_of_reference_modules() {
    let q = q0();
    let f = |s| string_f_polynomial(&q, &walk(&q, s)).unwrap();
    assert_eq!(f(M1).render(), "y1^2 + y1 + 1");
    assert_eq!(f(N).render(), "y3^2 + y3 + 1");
    let t = final_state();
    assert_eq!(f(M1), t.f[0]);
    assert_eq!(f(M2), t.f[1]);
    assert_eq!(f(M2).as_laurent().len(), 6);
    let f3 = f(M3);
    assert_eq!(f3, t.f[2]);
    assert_eq!(f3.as_laurent().len(), 14);
    assert_eq!(f3.eval_at_ones(), BigInt::from(21));
    let coeffs: Vec<BigInt> = f3.as_laurent().terms().values().cloned().collect();
    assert!(coeffs.contains(&BigInt::from(2)) && coeffs.contains(&BigInt::from(3)));
    assert_eq!(f3.as_laurent().coeff(&ExpVector(vec![4, 2, 2])), BigInt::from(1));
    assert_eq!(f3.as_laurent().coeff(&ExpVector(vec![3, 2, 2])), BigInt::from(2));
    assert_eq!(f3.as_laurent().coeff(&ExpVector(vec![2, 2, 2])), BigInt::from(3));
    assert_eq!(f3.constant_term(), BigInt::from(1));
}

#[test]
fn f_polynomial_counts_match_ideal_enumeration() {
    // brute force over all 2^nodes coordinate subsets
    let q = q0();
    for w in orbicluster::gentlerep::enumerate_strings(&q, 7) {
        let verts = w.vertices(&q).unwrap();
        let n = verts.len();
        let mut count = 0u64;
        for mask in 0u32..(1 << n) {
            let inside = |i: usize| mask & (1 << i) != 0;
            let closed = w.letters.iter().enumerate().all(|(i, l)| {
                let (from, to) = if l.inverse { (i + 1, i) } else { (i, i + 1) };
                !inside(from) || inside(to)
            });
            count += u64::from(closed);
        }
        let f = string_f_polynomial(&q, &w).unwrap();
        assert_eq!(f.eval_at_ones(), BigInt::from(count));
        let top: Vec<i64> = (0..3).map(|v| verts.iter().filter(|&&x| x == v).count() as i64).collect();
        assert_eq!(f.as_laurent().coeff(&ExpVector::from_i64(&top)), BigInt::from(1));
        assert_eq!(f.constant_term(), BigInt::from(1));
    }
}

#[test]
fn cc_functions_of_reference_modules() {
    let q = q0();
    let b = q.matrix.clone();
    let cc = |s| cc_string(&q, &b, &walk(&q, s)).unwrap();
    assert_eq!(cc(N), poly(&[(1, [0, 0, -1]), (1, [0, 1, -1]), (1, [0, 2, -1])]));
    assert_eq!(cc(M1), poly(&[(1, [-1, 2, 0]), (1, [-1, 1, 0]), (1, [-1, 0, 0])]));
    assert_eq!(
        cc(M2),
        poly(&[(1, [-1, 1, 0]), (1, [-1, 0, 0]), (1, [-1, -1, 0]), (1, [0, -1, -1]), (1, [0, 0, -1]), (1, [0, 1, -1])])
    );
    // printed with x_1^{-1}x_2^{-1} listed twice (coefficients 2 and 1)
    let printed = poly(&[
        (1, [-2, 2, 1]),
        (2, [-2, 1, 1]),
        (3, [-2, 0, 1]),
        (2, [-2, -1, 1]),
        (1, [-2, -2, 1]),
        (3, [-1, 0, 0]),
        (2, [-1, -1, 0]),
        (2, [-1, -2, 0]),
        (1, [0, -2, -1]),
        (1, [-1, 1, 0]),
        (1, [-1, -1, 0]),
        (1, [0, -1, -1]),
        (1, [0, 0, -1]),
    ]);
    assert_eq!(cc(M3), printed);
    assert_eq!(cc(M3).len(), 12);
    let (m1, m2, m3, n) = (cc(M1), cc(M2), cc(M3), cc(N));
    assert_eq!(&m3 * &n, &(&(&m1 * &m1) + &(&m1 * &m2)) + &(&m2 * &m2));
}

#[test]
fn cc_agrees_with_separation_formula() {
    let q = q0();
    let t = final_state();
    for (i, w) in [M1, M2, M3].iter().enumerate() {
        assert_eq!(cc_string(&q, &q.matrix, &walk(&q, w)).unwrap(), t.separated(i).unwrap());
    }
    assert_eq!(cc_sum(&[LaurentPoly::var(3, 0), LaurentPoly::var(3, 2)], &[2, 1]), poly(&[(1, [2, 0, 1])]));
}

#[test]
fn exchange_identities() {
    let ctx = AirContext::new(&digon(0).unwrap(), DEFAULT_MAX_STRING_LEN).unwrap();
    let row = load_pair_row(0, &ctx.quiver).unwrap();
    let chk = verify_exchange(&ctx, &row, 2).unwrap();
    assert!(chk.holds);
    let init = ctx.initial_pair();
    for k in 0..3 {
        assert!(verify_exchange(&ctx, &init, k).unwrap().holds);
    }
}

#[test]
fn pairs_match_seeds_at_depth_four() {
    let ctx = AirContext::new(&digon(0).unwrap(), DEFAULT_MAX_STRING_LEN).unwrap();
    let r = pair_seed_sweep(&ctx, 4, 2).unwrap();
    assert!(r.ok(), "{r:?}");
    assert_eq!(r.pair_nodes, r.seed_nodes);
}

#[test]
fn wall_action_examples() {
    let w = Wall::new(vec![1, 0, 0], 2);
    let s = TruncSeries::x_pow(&[-1, 0, 0], 4);
    let out = wall_action(&w, &s, 1, None);
    let mut want = TruncSeries::zero(4);
    for (k, c) in [(0, 1), (1, -1), (3, 1), (4, -1)] {
        want.add_term(ExpVector(vec![k, 0, 0]), ExpVector(vec![-1, 0, 0]), BigInt::from(c));
    }
    assert_eq!(out, want);
    let flat = TruncSeries::x_pow(&[0, 1, 0], 4);
    assert_eq!(wall_action(&w, &flat, 1, None), flat);
    let lin = Wall::new(vec![0, 1, 1], 1);
    let x = TruncSeries::x_pow(&[0, 1, 0], 4);
    let mut want = x.clone();
    want.add_term(ExpVector(vec![0, 1, 1]), ExpVector(vec![0, 1, 0]), BigInt::from(1));
    assert_eq!(wall_action(&lin, &x, 1, None), want);
    // inverse
    let back = wall_action(&w, &wall_action(&w, &s, 1, None), -1, None);
    assert_eq!(back, s);
    assert_eq!(path_product(&[], &[], &s), s);
}

#[test]
fn path_product_reproduces_f_polynomials() {
    let root = q0().matrix;
    let order = DEFAULT_ORDER;
    let mut paths: Vec<Vec<usize>> =
        (0..=DIGON_PATH.len()).map(|l| DIGON_PATH[..l].iter().map(|k| k - 1).collect()).collect();
    paths.extend([vec![1, 0, 2, 1], vec![2, 1, 0, 1], vec![0, 1, 2, 0]]);
    for path in paths {
        let walls = walls_along(&root, &path).unwrap();
        let t = TropicalState::walk(root.clone(), &path).unwrap();
        for i in 0..3 {
            let got = path_product(&walls, &bbar_matrix(&root), &TruncSeries::x_pow(&t.g[i], order));
            assert_eq!(got, TruncSeries::from_x_times_f(&t.g[i], &t.f[i], order), "path {path:?} i={i}");
        }
    }
}

#[test]
fn path_independence_around_rank_two_joint() {
    let b = ExchangeMatrix::new(vec![vec![0, -1], vec![2, 0]], vec![2, 1]).unwrap();
    let (p1, p2) = (vec![0, 1, 0], vec![1, 0, 1]);
    let t1 = TropicalState::walk(b.clone(), &p1).unwrap();
    let t2 = TropicalState::walk(b.clone(), &p2).unwrap();
    let mut g1 = t1.g.clone();
    let mut g2 = t2.g.clone();
    g1.sort();
    g2.sort();
    assert_eq!(g1, g2, "both paths end in the same chamber");
    let w1 = walls_along(&b, &p1).unwrap();
    let w2 = walls_along(&b, &p2).unwrap();
    for m in [[1, 0], [0, 1], [-1, 0], [0, -1], [2, -1], [-1, 3]] {
        let s = TruncSeries::x_pow(&m, 8);
        let bb = bbar_matrix(&b);
        assert_eq!(path_product(&w1, &bb, &s), path_product(&w2, &bb, &s), "m = {m:?}");
    }
}

#[test]
fn y_polynomial_series_round_trip() {
    let f = YPoly::from_laurent(poly(&[(1, [0, 0, 0]), (2, [1, 0, 0])])).unwrap();
    let s = TruncSeries::from_x_times_f(&[1, 0, 0], &f, 3);
    assert_eq!(s.terms.len(), 2);
    assert!(s.to_string().ends_with("O(y^4)"));
}
