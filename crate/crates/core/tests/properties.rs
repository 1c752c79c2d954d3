use num_bigint::BigInt;
use proptest::prelude::*;

use orbicluster::fixtures::{digon, read_json};
use orbicluster::symbolic::{substitute_monomials, ExpVector};
use orbicluster::taufan::{AirContext, DEFAULT_MAX_STRING_LEN};
use orbicluster::tropical::{b_from_c_vectors, TropicalState};
use orbicluster::{ExchangeMatrix, GenSeed, LaurentPoly, YPoly};

fn laurent(nvars: usize, lo: i32) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((prop::collection::vec(lo..=2i32, nvars), -3i64..=3), 0..5).prop_map(move |terms| {
        let mut p = LaurentPoly::zero(nvars);
        for (e, c) in terms {
            p.add_term(ExpVector(e), BigInt::from(c));
        }
        p
    })
}

fn nonzero_laurent(nvars: usize) -> impl Strategy<Value = LaurentPoly> {
    laurent(nvars, -2).prop_filter("nonzero", |p| !p.is_zero())
}

/// Mutation paths without immediate repeats.
fn path(n: usize, max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..n, 0..=max).prop_map(|mut v| {
        v.dedup();
        v
    })
}

/// B = S·R with S skew-symmetric and R = diag(r): divisible by r_j column-wise
/// and skew-symmetrized by R.
fn generalized_matrix() -> impl Strategy<Value = ExchangeMatrix> {
    (prop::collection::vec(-1i64..=1, 3), prop::collection::vec(1i64..=2, 3)).prop_map(|(s, r)| {
        let mut sk = [[0i64; 3]; 3];
        let mut k = 0;
        for i in 0..3 {
            for j in i + 1..3 {
                sk[i][j] = s[k];
                sk[j][i] = -s[k];
                k += 1;
            }
        }
        let b = (0..3).map(|i| (0..3).map(|j| sk[i][j] * r[j]).collect()).collect();
        ExchangeMatrix::new(b, r).unwrap()
    })
}

fn kappa(j: usize) -> ExchangeMatrix {
    read_json(&format!("b_kappa{j}.json")).unwrap()
}

fn det3(m: &[Vec<i64>]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn sign_coherent(v: &[i64]) -> bool {
    v.iter().any(|&x| x != 0) && (v.iter().all(|&x| x >= 0) || v.iter().all(|&x| x <= 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in laurent(2, -2), b in laurent(2, -2), c in laurent(2, -2)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn divexact_inverts_multiplication(a in laurent(2, -2), b in nonzero_laurent(2)) {
        prop_assert_eq!((&a * &b).divexact(&b).unwrap(), a);
    }

    #[test]
    fn substitution_is_multiplicative(
        f in laurent(2, 0),
        g in laurent(2, 0),
        imgs in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 2),
    ) {
        let images: Vec<LaurentPoly> = imgs.iter().map(|e| LaurentPoly::x_pow(e)).collect();
        let fy = YPoly::from_laurent(f.clone()).unwrap();
        let gy = YPoly::from_laurent(g.clone()).unwrap();
        let fg = YPoly::from_laurent(&f * &g).unwrap();
        let lhs = substitute_monomials(&fg, &images).unwrap();
        let rhs = &substitute_monomials(&fy, &images).unwrap() * &substitute_monomials(&gy, &images).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn matrix_mutation_is_involutive(b in generalized_matrix(), k in 0usize..3) {
        prop_assert_eq!(b.mutate(k).unwrap().mutate(k).unwrap(), b.clone());
        prop_assert!(b.mutate(k).unwrap().validate().is_ok());
    }

    #[test]
    fn seed_mutation_is_involutive(j in 0usize..5, p in path(3, 3), k in 0usize..3) {
        let s = GenSeed::initial(kappa(j)).unwrap().mutate_path(&p).unwrap();
        prop_assert_eq!(s.mutate(k).unwrap().mutate(k).unwrap(), s);
    }

    #[test]
    fn flips_are_involutive(j in 0usize..5, p in path(3, 3), k in 1usize..=3) {
        let t = digon(j).unwrap().flip_path(&p.iter().map(|k| k + 1).collect::<Vec<_>>()).unwrap();
        prop_assert!(t.flip(k).unwrap().flip(k).unwrap().same_gluing(&t));
    }

    #[test]
    fn tropical_invariants_along_digon_paths(j in 0usize..5, p in path(3, 5)) {
        let root = kappa(j);
        let s = TropicalState::walk(root.clone(), &p).unwrap();
        for c in &s.c {
            prop_assert!(sign_coherent(c), "c-vector {:?} on path {:?}", c, p);
        }
        prop_assert!(det3(&s.g).abs() == 1);
        prop_assert_eq!(b_from_c_vectors(&root, &s.c), s.b.b.clone());
        let seed = GenSeed::initial(root).unwrap().mutate_path(&p).unwrap();
        prop_assert_eq!(&seed.matrix, &s.b);
        for i in 0..3 {
            prop_assert_eq!(&s.separated(i).unwrap(), &seed.cluster[i]);
        }
    }

    #[test]
    fn laurent_phenomenon_on_generalized_matrices(b in generalized_matrix(), p in path(3, 5)) {
        let s = GenSeed::initial(b.clone()).unwrap().mutate_path(&p);
        prop_assert!(s.is_ok(), "division failed on path {:?}: {:?}", p, s.err());
        let t = TropicalState::walk(b.clone(), &p).unwrap();
        for c in &t.c {
            prop_assert!(sign_coherent(c));
        }
        prop_assert!(det3(&t.g).abs() == 1);
        prop_assert_eq!(b_from_c_vectors(&b, &t.c), t.b.b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn air_mutation_is_involutive(p in path(3, 3), k in 0usize..3) {
        let ctx = AirContext::new(&digon(0).unwrap(), DEFAULT_MAX_STRING_LEN).unwrap();
        let a = ctx.mutate_path(&ctx.initial_pair(), &p).unwrap();
        let b = ctx.mutate(&ctx.mutate(&a, k).unwrap(), k).unwrap();
        prop_assert_eq!(&a.gvectors, &b.gvectors);
        prop_assert_eq!(&a.summands, &b.summands);
        let t = TropicalState::walk(ctx.root().clone(), &p).unwrap();
        prop_assert_eq!(ctx.matrix_at(&a).unwrap(), t.b);
    }
}
