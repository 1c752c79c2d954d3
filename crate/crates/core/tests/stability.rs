use itertools::Itertools;
use num_traits::Signed;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use orbicluster::fixtures::{digon, DIGON_PATH};
use orbicluster::gentlerep::*;
use orbicluster::linalg::{q, Q};
use orbicluster::quiver_of;
use orbicluster::stability::*;
use orbicluster::tropical::TropicalState;

fn r_table(j: usize) -> [[i64; 3]; 3] {
    [
        [[-1, 0, 0], [0, 1, 0], [0, -1, -1]],
        [[1, 0, 0], [0, 1, 0], [0, -1, -1]],
        [[1, 0, 0], [0, -1, -2], [0, 1, 1]],
        [[1, 0, 0], [0, 1, 2], [0, 0, -1]],
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    ][j]
}

fn column(m: &[[i64; 3]; 3], i: usize) -> Vec<i64> {
    (0..3).map(|a| m[a][i]).collect()
}

#[test]
fn t_map_fixes_hyperplane_and_inverts() {
    let mut rng = StdRng::seed_from_u64(7);
    for j in 0..=4 {
        let b = quiver_of(&digon(j).unwrap()).matrix;
        for k in 0..3 {
            for _ in 0..10 {
                let theta: Vec<Q> =
                    (0..3).map(|_| Q::new(rng.gen_range(-9..=9).into(), rng.gen_range(1..=5).into())).collect();
                let mut flat = theta.clone();
                flat[k] = q(0);
                for s in [Sign::Plus, Sign::Minus] {
                    assert_eq!(t_map(&flat, k, s, &b), flat);
                }
                let bk = b.mutate(k).unwrap();
                assert_eq!(t_map(&t_map(&theta, k, Sign::Plus, &b), k, Sign::Minus, &bk), theta);
                assert_eq!(t_map(&t_map(&theta, k, Sign::Minus, &b), k, Sign::Plus, &bk), theta);
            }
        }
    }
}

#[test]
fn chambers_reproduce_r_vector_table() {
    let flips: Vec<usize> = DIGON_PATH.iter().map(|k| k - 1).collect();
    let p = chamber_path(&digon(0).unwrap(), &flips).unwrap();
    assert_eq!(p.signs, vec![Sign::Plus; 4]);
    assert_eq!(p.cones.len(), 5);
    for j in 0..=4 {
        for i in 0..3 {
            assert_eq!(p.cones[j].rays[i], column(&r_table(j), i), "κ{j} r{}", i + 1);
        }
    }
    let single = chamber_path(&digon(3).unwrap(), &[2]).unwrap();
    assert_eq!(single.signs, vec![Sign::Plus]);
    assert!(render_chambers(&p).starts_with("signs: (+,+,+,+)"));
}

#[test]
fn chamber_rays_are_tropical_g_vectors() {
    let t0 = digon(0).unwrap();
    let root = quiver_of(&t0).matrix;
    let mut checked = 0;
    for len in 1..=4 {
        for path in (0..len).map(|_| 0..3usize).multi_cartesian_product() {
            if path.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let p = chamber_path(&t0, &path).unwrap();
            let t = TropicalState::walk(root.clone(), &path).unwrap();
            assert_eq!(p.cones[0].rays, t.g, "{path:?}");
            assert_eq!(p.cones[0].normals, t.c, "{path:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 3 + 6 + 12 + 24);
}

#[test]
fn semistability_basics() {
    let qv = quiver_of(&digon(0).unwrap());
    let positive = theta_from_i64(&[1, 2, 3]);
    for w in enumerate_strings(&qv, 6) {
        assert_eq!(semistable_string(&qv, &w, &positive).unwrap(), Verdict::Unstable);
    }
    for i in 0..3 {
        let mut th = theta_from_i64(&[3, -5, 7]);
        th[i] = q(0);
        assert_eq!(semistable_string(&qv, &Walk::trivial(i), &th).unwrap(), Verdict::Stable);
    }
}

#[test]
fn wall_between_row0_and_its_mutation() {
    let qv = quiver_of(&digon(0).unwrap());
    // shared rays (-1,0,0) and (0,1,-1); the normal of the third facet is -(0,1,1)
    let theta = theta_from_i64(&[-1, 1, -1]);
    let d = vec![0, 1, 1];
    assert_eq!(evaluate(&theta, &d), q(0));
    let gen = Walk::parse(&qv, "@3 3-2").unwrap();
    assert_eq!(semistable_string(&qv, &gen, &theta).unwrap(), Verdict::Stable);
    let mut semistable = 0;
    for w in enumerate_strings(&qv, 12) {
        let v = semistable_string(&qv, &w, &theta).unwrap();
        if v != Verdict::Unstable {
            let m = string_module(&qv, &w).unwrap();
            let dv = m.dim_vector();
            let t = dv[1];
            assert!(t > 0 && dv == vec![0, t, t], "{} is semistable off the wall", w.render(&qv));
            semistable += 1;
        }
    }
    assert!(semistable >= 1);
}

#[test]
fn semistability_transport_under_reflection() {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut samples = 0;
    let mut semistable_seen = 0;
    for j in 0..=4 {
        let t = digon(j).unwrap();
        let qv = quiver_of(&t);
        for k in 0..3 {
            let sigma = t.flip(k + 1).unwrap();
            let qs = quiver_of(&sigma);
            let sk = QuiverRep::simple(&qv, k);
            for w in enumerate_strings(&qv, 5).into_iter().step_by(3) {
                let m = string_module(&qv, &w).unwrap();
                let d = m.dim_vector();
                let mut theta: Vec<Q> =
                    (0..3).map(|_| Q::new(rng.gen_range(-6..=6).into(), rng.gen_range(1..=3).into())).collect();
                theta[k] = Q::new(rng.gen_range(1..=6).into(), rng.gen_range(1..=3).into());
                // move θ onto d^⊥ through a coordinate other than k when possible
                if let Some(i) = (0..3).rev().find(|&i| i != k && d[i] != 0) {
                    let rest = evaluate(&theta, &d) - &theta[i] * q(d[i]);
                    theta[i] = -rest / q(d[i]);
                }
                assert!(theta[k].is_positive());
                let lhs = semistable_string(&qv, &w, &theta).unwrap() != Verdict::Unstable;
                let rhs = hom_dim(&m, &sk, &qv) == 0 && {
                    let (fm, _) = reflect(&t, &m, k, Reflection::Plus).unwrap();
                    let theta2 = t_map(&theta, k, Sign::Plus, &qv.matrix);
                    let fw = string_of(&qs, &fm, 16).expect("reflected string module is a string module");
                    semistable_string(&qs, &fw, &theta2).unwrap() != Verdict::Unstable
                };
                assert_eq!(lhs, rhs, "κ{j} k={} {} θ={theta:?}", k + 1, w.render(&qv));
                samples += 1;
                semistable_seen += usize::from(lhs);
            }
        }
    }
    assert!(samples >= 100, "{samples}");
    assert!(semistable_seen > 0);
}
