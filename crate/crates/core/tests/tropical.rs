use itertools::Itertools;
use orbicluster::fixtures::{read_json, DIGON_PATH};
use orbicluster::symbolic::LaurentPoly;
use orbicluster::tropical::{tropical_step, verify_separation, TropicalState};
use orbicluster::{ExchangeMatrix, GenSeed};

fn b(j: usize) -> ExchangeMatrix {
    let m: ExchangeMatrix = read_json(&format!("b_kappa{j}.json")).unwrap();
    m.validate().unwrap();
    m
}

/// Columns r_1^j, r_2^j, r_3^j of the r-vector table.
fn r_columns(j: usize) -> Vec<Vec<i64>> {
    let m: [[i64; 3]; 3] = match j {
        4 => [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        3 => [[1, 0, 0], [0, 1, 2], [0, 0, -1]],
        2 => [[1, 0, 0], [0, -1, -2], [0, 1, 1]],
        1 => [[1, 0, 0], [0, 1, 0], [0, -1, -1]],
        0 => [[-1, 0, 0], [0, 1, 0], [0, -1, -1]],
        _ => unreachable!(),
    };
    (0..3).map(|c| (0..3).map(|r| m[r][c]).collect()).collect()
}

#[test]
fn g_rows_reproduce_r_vector_table() {
    for j in 0..=4 {
        let path: Vec<usize> = DIGON_PATH[j..].iter().map(|k| k - 1).collect();
        let s = TropicalState::walk(b(j), &path).unwrap();
        assert_eq!(s.g, r_columns(j), "root kappa{j}");
        assert_eq!(s.b, b(4));
        s.check_invariants().unwrap();
    }
}

fn y(e: [i64; 3]) -> LaurentPoly {
    LaurentPoly::x_pow(&e)
}

#[test]
fn f_polynomial_of_arc_three_after_full_path() {
    let path: Vec<usize> = DIGON_PATH.iter().map(|k| k - 1).collect();
    let s = TropicalState::walk(b(0), &path).unwrap();
    let terms: [(i64, [i64; 3]); 14] = [
        (1, [4, 2, 2]),
        (2, [3, 2, 2]),
        (3, [2, 2, 2]),
        (2, [1, 2, 2]),
        (1, [0, 2, 2]),
        (2, [2, 1, 2]),
        (2, [1, 1, 2]),
        (2, [0, 1, 2]),
        (1, [0, 0, 2]),
        (1, [2, 1, 1]),
        (1, [1, 1, 1]),
        (1, [0, 1, 1]),
        (1, [0, 0, 1]),
        (1, [0, 0, 0]),
    ];
    let expected = terms.iter().fold(LaurentPoly::zero(3), |acc, (c, e)| &acc + &y(*e).scale(&(*c).into()));
    assert_eq!(s.f[2].as_laurent(), &expected);
    assert_eq!(s.f[2].as_laurent().len(), 14);
    assert_eq!(s.f[2].eval_at_ones(), 21.into());
    assert_eq!(s.f[2].as_laurent().leading_term().unwrap().0 .0, vec![4, 2, 2]);
    assert_eq!(s.f[0].render(), "y1^2 + y1 + 1");
    assert_eq!(s.f[1].render(), "y1^2*y2*y3^2 + y1*y2*y3^2 + y2*y3^2 + y3^2 + y3 + 1");
    assert_eq!(s.g[2], vec![0, 0, -1]);
}

#[test]
fn separation_holds_for_all_paths_up_to_length_four() {
    let s0 = GenSeed::initial(b(0)).unwrap();
    let t0 = TropicalState::initial(b(0)).unwrap();
    assert!(verify_separation(&t0, &s0));
    let mut checked = 0;
    for len in 1..=4usize {
        for path in (0..len).map(|_| 0..3usize).multi_cartesian_product() {
            if path.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let t = path.iter().try_fold(t0.clone(), |t, &k| tropical_step(&t, k)).unwrap();
            t.check_invariants().unwrap();
            let seed = s0.mutate_path(&path).unwrap();
            assert!(verify_separation(&t, &seed), "path {path:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 3 + 6 + 12 + 24);
}

#[test]
fn separation_rejects_wrong_seed() {
    let t = TropicalState::walk(b(0), &[0]).unwrap();
    let seed = GenSeed::initial(b(0)).unwrap().mutate(1).unwrap();
    assert!(!verify_separation(&t, &seed));
}

#[test]
fn out_of_range_index() {
    let t = TropicalState::initial(b(0)).unwrap();
    assert!(tropical_step(&t, 3).is_err());
}
