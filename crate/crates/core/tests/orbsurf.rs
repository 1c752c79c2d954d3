use orbicluster::fixtures::{digon, DIGON_PATH};
use orbicluster::orbsurf::{flip_graph, quiver_of, Diagnostic, Side, Triangle, Triangulation};
use orbicluster::{Error, GenSeed};

fn expected_b(j: usize) -> Vec<Vec<i64>> {
    match j {
        0 => vec![vec![0, -1, 0], vec![2, 0, -2], vec![0, 1, 0]],
        1 => vec![vec![0, 1, 0], vec![-2, 0, -2], vec![0, 1, 0]],
        2 => vec![vec![0, 1, 0], vec![-2, 0, 2], vec![0, -1, 0]],
        3 => vec![vec![0, -1, 2], vec![2, 0, -2], vec![-2, 1, 0]],
        4 => vec![vec![0, 1, -2], vec![-2, 0, 2], vec![2, -1, 0]],
        _ => unreachable!(),
    }
}

#[test]
fn fixtures_validate_and_give_expected_matrices() {
    for j in 0..5 {
        let t = digon(j).unwrap();
        t.validate().unwrap();
        let q = quiver_of(&t);
        assert_eq!(q.matrix.b, expected_b(j), "kappa{j}");
        assert_eq!(q.matrix.r, vec![2, 1, 2]);
        q.gentle_audit().unwrap();
    }
}

#[test]
fn kappa0_and_kappa4_quivers() {
    let q0 = quiver_of(&digon(0).unwrap());
    let ids: Vec<&str> = q0.arrows.iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids, vec!["2-1", "3-2", "e1", "e3"]);
    assert_eq!(q0.relations.len(), 2);
    let q4 = quiver_of(&digon(4).unwrap());
    let ids: Vec<&str> = q4.arrows.iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids, vec!["1-2", "2-3", "3-1", "e1", "e3"]);
    assert_eq!(q4.relations.len(), 5);
}

#[test]
fn flips_follow_the_digon_path() {
    let mut t = digon(0).unwrap();
    for (j, &k) in DIGON_PATH.iter().enumerate() {
        let next = t.flip(k).unwrap();
        let expected = digon(j + 1).unwrap();
        assert!(next.same_gluing(&expected), "flip {k} of kappa{j}");
        assert_eq!(quiver_of(&next).matrix, quiver_of(&t).matrix.mutate(k - 1).unwrap());
        assert!(next.flip(k).unwrap().same_gluing(&t), "involution at {k}");
        t = next;
    }
}

#[test]
fn validation_diagnostics() {
    let mut t = digon(0).unwrap();
    t.triangles.push(Triangle::Singular { side: Side::Arc(1) });
    let err = t.validate().unwrap_err();
    assert!(err.to_string().contains("pending arc multiplicity"));
    assert!(
        matches!(err, Error::Triangulation(ref d) if d.contains(&Diagnostic::PendingArcMultiplicity { arc: 1, count: 2 }))
    );

    let three: Triangulation = serde_json::from_str(
        r#"{"arcs":[{"id":1,"pending":true},{"id":2,"pending":true},{"id":3,"pending":true}],
            "boundary":[],
            "triangles":[{"kind":"nonsingular","sides":[{"arc":1},{"arc":2},{"arc":3}]},
                         {"kind":"singular","side":{"arc":1}},{"kind":"singular","side":{"arc":2}},
                         {"kind":"singular","side":{"arc":3}}]}"#,
    )
    .unwrap();
    let d = three.diagnostics();
    assert!(d.contains(&Diagnostic::TooManyPendingSides(1)));
}

#[test]
fn boundary_flip_rejected() {
    assert!(matches!(digon(0).unwrap().flip(7), Err(Error::FlipNotArc(_))));
}

#[test]
fn no_internal_triangle_no_relations() {
    let t: Triangulation = serde_json::from_str(
        r#"{"arcs":[{"id":1}],"boundary":["a","b","c","d"],
            "triangles":[{"kind":"nonsingular","sides":[{"arc":1},{"boundary":"a"},{"boundary":"b"}]},
                         {"kind":"nonsingular","sides":[{"arc":1},{"boundary":"c"},{"boundary":"d"}]}]}"#,
    )
    .unwrap();
    t.validate().unwrap();
    let q = quiver_of(&t);
    assert!(q.relations.is_empty());
    assert!(q.arrows.is_empty());
}

#[test]
fn flip_graph_matches_seed_graph_counts() {
    let t0 = digon(0).unwrap();
    let s0 = GenSeed::initial(quiver_of(&t0).matrix).unwrap();
    for depth in 0..=4 {
        let fg = flip_graph(&t0, depth, 0).unwrap();
        let sg = orbicluster::genseed::explore_exchange_graph(&s0, depth, 0).unwrap();
        assert_eq!(fg.nodes.len(), sg.nodes.len(), "depth {depth}");
        assert_eq!(fg.edges.len(), sg.edges.len(), "depth {depth}");
    }
    let fg = flip_graph(&t0, 4, 0).unwrap();
    let mut t = t0.clone();
    for &k in &DIGON_PATH {
        t = t.flip(k).unwrap();
        assert!(fg.nodes.iter().any(|(s, _)| s.triangulation.same_gluing(&t)));
    }
}
