use std::collections::{BTreeSet, HashMap};

use orbicluster::fixtures::{digon, read_json, DIGON_PATH};
use orbicluster::genseed::explore_exchange_graph;
use orbicluster::gentlerep::{is_isomorphic, QuiverRep, RepJson};
use orbicluster::taufan::*;
use orbicluster::tropical::TropicalState;
use orbicluster::{quiver_of, GenSeed};

fn ctx(j: usize) -> AirContext {
    AirContext::new(&digon(j).unwrap(), DEFAULT_MAX_STRING_LEN).unwrap()
}

fn same_pair(c: &AirContext, a: &TauRigidPair, b: &TauRigidPair) -> bool {
    a.gvectors == b.gvectors
        && a.summands.iter().zip(&b.summands).all(|(x, y)| match (x, y) {
            (Summand::Module(m), Summand::Module(n)) => is_isomorphic(m, n, &c.quiver),
            (Summand::Shifted(i), Summand::Shifted(j)) => i == j,
            _ => false,
        })
}

#[test]
fn air_path_reaches_reference_pairs() {
    for j in 0..=4 {
        let c = ctx(j);
        let path: Vec<usize> = DIGON_PATH[j..].iter().map(|k| k - 1).collect();
        let got = c.mutate_path(&c.initial_pair(), &path).unwrap();
        let want = load_pair_row(j, &c.quiver).unwrap();
        c.verify(&want).unwrap();
        assert!(same_pair(&c, &got, &want), "row {j}: {:?} vs {:?}", got.gvectors, want.gvectors);
    }
}

#[test]
fn row0_gvectors_and_cone() {
    let c = ctx(0);
    let p = load_pair_row(0, &c.quiver).unwrap();
    assert_eq!(p.gvectors, vec![vec![-1, 0, 0], vec![0, 1, -1], vec![0, 0, -1]]);
    let cone = cone_of(&p).unwrap();
    // columns of the κ_0 matrix of r-vectors
    let r0 = [[-1, 0, 0], [0, 1, 0], [0, -1, -1]];
    for i in 0..3 {
        assert_eq!(cone.rays[i], (0..3).map(|a| r0[a][i]).collect::<Vec<_>>());
    }
    let init = cone_of(&c.initial_pair()).unwrap();
    assert_eq!(init.rays, init.normals);
    assert!(init.contains(&[1, 2, 3]) && !init.contains(&[1, -1, 0]));
}

#[test]
fn mutation_at_three_produces_n() {
    let c = ctx(0);
    let p = load_pair_row(0, &c.quiver).unwrap();
    let m = c.mutate(&p, 2).unwrap();
    assert_eq!(m.gvectors[2], vec![0, 2, -1]);
    let v: serde_json::Value = read_json("pairs/mutated_row0.json").unwrap();
    let rj: RepJson = serde_json::from_value(v["summands"][2]["module"].clone()).unwrap();
    let n = QuiverRep::from_json(&c.quiver, &rj).unwrap();
    match &m.summands[2] {
        Summand::Module(x) => assert!(is_isomorphic(x, &n, &c.quiver)),
        other => panic!("expected a module, got {other:?}"),
    }
    assert!(same_pair(&c, &c.mutate(&m, 2).unwrap(), &p));
}

#[test]
fn mutation_is_an_involution() {
    let c = ctx(0);
    let mut p = c.initial_pair();
    for &k in &[0usize, 2, 1, 2, 0, 1] {
        let m = c.mutate(&p, k).unwrap();
        assert_ne!(m.key(), p.key());
        assert!(same_pair(&c, &c.mutate(&m, k).unwrap(), &p));
        p = m;
    }
}

#[test]
fn gvectors_follow_tropical_recursion() {
    let c = ctx(0);
    let root = c.root().clone();
    for path in [vec![0, 1, 2, 0, 1], vec![1, 0, 2, 1, 0], vec![2, 1, 0, 2, 1]] {
        let mut p = c.initial_pair();
        let mut t = TropicalState::initial(root.clone()).unwrap();
        for k in path {
            p = c.mutate(&p, k).unwrap();
            t = orbicluster::tropical::tropical_step(&t, k).unwrap();
            assert_eq!(p.gvectors, t.g);
            assert_eq!(cone_of(&p).unwrap().normals, t.c);
            assert_eq!(c.matrix_at(&p).unwrap(), t.b);
        }
    }
}

#[test]
fn realization_bound_is_reported() {
    let c = AirContext::new(&digon(0).unwrap(), 1).unwrap();
    let p = c.initial_pair();
    let deep = c.mutate_path(&p, &[0, 2, 1, 2]);
    assert!(matches!(deep, Err(orbicluster::Error::RealizationBound { .. })));
}

#[test]
fn exchange_graph_matches_seed_graph() {
    let c = ctx(0);
    let depth = 4;
    let g = stau_exchange_graph(&c, &c.initial_pair(), depth, 2).unwrap();
    assert_eq!(stau_exchange_graph(&c, &c.initial_pair(), 0, 1).unwrap().nodes.len(), 1);
    let want = "[-1, 0, 0] [0, 0, -1] [0, 1, -1]";
    assert!(g.index_of(want).is_some());
    check_fan(&g).unwrap();

    let seeds = explore_exchange_graph(&GenSeed::initial(c.root().clone()).unwrap(), depth, 2).unwrap();
    assert_eq!(g.nodes.len(), seeds.nodes.len());
    assert_eq!(g.edges.len(), seeds.edges.len());
    // map each pair to the seed with the same cluster, via x^g F
    let cluster_key = |vars: Vec<String>| vars.into_iter().collect::<BTreeSet<_>>();
    let seed_index: HashMap<BTreeSet<String>, usize> = seeds
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (cluster_key(n.seed.cluster.iter().map(|p| p.render("x")).collect()), i))
        .collect();
    let mut image = Vec::new();
    for (p, _, _) in &g.nodes {
        let t = TropicalState::walk(c.root().clone(), p.path.as_ref().unwrap()).unwrap();
        assert_eq!(t.g, p.gvectors);
        let vars = (0..3).map(|j| t.separated(j).unwrap().render("x")).collect();
        image.push(*seed_index.get(&cluster_key(vars)).expect("pair maps to a seed"));
    }
    assert_eq!(image.iter().collect::<BTreeSet<_>>().len(), image.len());
    let seed_edges: BTreeSet<(usize, usize)> = seeds.edges.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
    for e in &g.edges {
        let (a, b) = (image[e.a], image[e.b]);
        assert!(seed_edges.contains(&(a.min(b), a.max(b))));
    }
}

#[test]
fn pair_file_round_trip() {
    let c = ctx(0);
    let p = load_pair_row(0, &c.quiver).unwrap();
    let f = p.to_file(0, &c.quiver);
    let back = TauRigidPair::from_file(&serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap(), &c.quiver)
        .unwrap();
    assert!(same_pair(&c, &p, &back));
    let q4 = quiver_of(&digon(4).unwrap());
    assert_eq!(load_pair_row(4, &q4).unwrap().projective_summands(), vec![0, 1, 2]);
}
