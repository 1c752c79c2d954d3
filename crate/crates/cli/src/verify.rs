//! `verify-main`: the digon example end to end, against `expected/digon.json`.

use std::fmt::Write as _;

use serde::Deserialize;

use orbicluster::ccscatter::{
    bbar_matrix, cc_string, pair_seed_sweep, path_product, string_f_polynomial, walls_along, TruncSeries,
};
use orbicluster::fixtures::{read_json, DIGON_PATH};
use orbicluster::gentlerep::{g_vector, string_of, QuiverRep};
use orbicluster::stability::{chamber_path, Sign};
use orbicluster::taufan::{load_pair_row, AirContext, PairFile, Summand, TauRigidPair};
use orbicluster::tropical::TropicalState;
use orbicluster::{quiver_of, ExchangeMatrix, LaurentPoly, Triangulation};

use crate::{Failure, Format, Global, Run};

#[derive(Deserialize)]
struct Expected {
    /// Columns of each r-vector matrix, κ_0..κ_4.
    r_columns: Vec<Vec<Vec<i64>>>,
    modules: Vec<ExpectedModule>,
}

#[derive(Deserialize)]
struct ExpectedModule {
    name: String,
    g: Vec<i64>,
    f: String,
    cc: String,
}

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push((name.to_string(), ok, detail));
    }

    fn diff<T: std::fmt::Debug + PartialEq>(&mut self, name: &str, got: &T, want: &T) {
        let detail = if got == want { String::new() } else { format!("expected {want:?}\n     got {got:?}") };
        self.check(name, got == want, detail);
    }
}

fn module_slot(p: &TauRigidPair, i: usize) -> Result<QuiverRep, Failure> {
    match &p.summands[i] {
        Summand::Module(m) => Ok(m.clone()),
        Summand::Shifted(_) => Err(Failure::Usage(format!("slot {} is a shifted projective", i + 1))),
    }
}

pub fn verify_main(g: &Global, t: &Triangulation, depth: usize, order: usize) -> Run {
    let exp: Expected = read_json("expected/digon.json")?;
    let mut r = Report { lines: Vec::new() };
    let flips: Vec<usize> = DIGON_PATH.iter().map(|k| k - 1).collect();

    let mut kappas = vec![t.clone()];
    for &k in &DIGON_PATH {
        let next = kappas.last().unwrap().flip(k)?;
        kappas.push(next);
    }
    let mats: Vec<ExchangeMatrix> = kappas.iter().map(|k| quiver_of(k).matrix).collect();
    for j in 0..=4 {
        let want: ExchangeMatrix = read_json(&format!("b_kappa{j}.json"))?;
        r.diff(&format!("B(kappa{j})"), &mats[j].b, &want.b);
    }
    for j in 0..4 {
        r.diff(&format!("flip {} mutates B(kappa{j})", DIGON_PATH[j]), &mats[j + 1], &mats[j].mutate(flips[j])?);
    }

    let ch = chamber_path(t, &flips)?;
    r.diff("chamber signs", &ch.signs, &vec![Sign::Plus; 4]);
    for j in 0..=4 {
        r.diff(&format!("r-vectors kappa{j}"), &ch.cones[j].rays, &exp.r_columns[j]);
        let suffix = TropicalState::walk(mats[j].clone(), &flips[j..])?;
        r.diff(&format!("g-vectors from kappa{j} along the suffix"), &suffix.g, &exp.r_columns[j]);
    }

    let ctx = AirContext::new(t, g.max_string_len)?;
    let q = &ctx.quiver;
    let row0 = load_pair_row(0, q)?;
    for j in 0..=4 {
        let qj = kappas[j].quiver()?;
        let row = load_pair_row(j, &qj)?;
        let ok = AirContext::new(&kappas[j], g.max_string_len)?.verify(&row).is_ok() && row.is_support_tilting(qj.n);
        r.check(&format!("pair over kappa{j} is support tau-tilting"), ok, String::new());
    }
    let mutated = ctx.mutate(&row0, 2)?;
    let fixture: PairFile = read_json("pairs/mutated_row0.json")?;
    let fixture = TauRigidPair::from_file(&fixture, q)?;
    r.diff("AIR mutation of the kappa0 pair at 3", &mutated.gvectors, &fixture.gvectors);

    let mods = [module_slot(&row0, 0)?, module_slot(&row0, 1)?, module_slot(&row0, 2)?, module_slot(&mutated, 2)?];
    let mut ccs: Vec<LaurentPoly> = Vec::new();
    for (m, e) in mods.iter().zip(&exp.modules) {
        r.diff(&format!("g({})", e.name), &g_vector(m, q)?, &e.g);
        let w = string_of(q, m, m.total_dim())
            .ok_or_else(|| Failure::Usage(format!("{} is not a string module", e.name)))?;
        r.diff(&format!("F({})", e.name), &string_f_polynomial(q, &w)?.to_string(), &e.f);
        let c = cc_string(q, &q.matrix, &w)?;
        r.diff(&format!("CC({})", e.name), &c.to_string(), &e.cc);
        ccs.push(c);
    }
    let (m1, m2, m3, n) = (&ccs[0], &ccs[1], &ccs[2], &ccs[3]);
    let lhs = m3 * n;
    let rhs = &(&(m1 * m1) + &(m1 * m2)) + &(m2 * m2);
    r.diff("CC(M3)CC(N) = CC(M1)^2 + CC(M1)CC(M2) + CC(M2)^2", &lhs.to_string(), &rhs.to_string());

    let walls = walls_along(&q.matrix, &flips)?;
    let end = TropicalState::walk(q.matrix.clone(), &flips)?;
    let bbar = bbar_matrix(&q.matrix);
    for i in 0..q.n {
        let got = path_product(&walls, &bbar, &TruncSeries::x_pow(&end.g[i], order));
        let want = TruncSeries::from_x_times_f(&end.g[i], &end.f[i], order);
        r.diff(&format!("wall crossing of x^g{} to order {order}", i + 1), &got.to_string(), &want.to_string());
    }

    let sweep = pair_seed_sweep(&ctx, depth, g.jobs)?;
    let detail = format!("{sweep:?}");
    r.check(
        &format!(
            "sweep to depth {depth}: {} pairs, {} seeds, {} edges",
            sweep.pair_nodes, sweep.seed_nodes, sweep.pair_edges
        ),
        sweep.ok(),
        if sweep.ok() { String::new() } else { detail },
    );

    let ok = r.lines.iter().all(|l| l.1);
    let out = match g.format {
        Format::Json => {
            let checks: Vec<_> =
                r.lines.iter().map(|(n, ok, d)| serde_json::json!({"check": n, "pass": ok, "detail": d})).collect();
            serde_json::json!({"checks": checks, "ok": ok, "sweep": sweep}).to_string() + "\n"
        }
        _ => {
            let mut out = String::new();
            for (name, pass, detail) in &r.lines {
                writeln!(out, "{} {name}", if *pass { "PASS" } else { "FAIL" }).unwrap();
                if !detail.is_empty() {
                    writeln!(out, "     {detail}").unwrap();
                }
            }
            writeln!(out, "{}", if ok { "all checks passed" } else { "some checks failed" }).unwrap();
            out
        }
    };
    if ok {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}
