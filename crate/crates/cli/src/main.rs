mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use orbicluster::ccscatter::{
    bbar_matrix, cc_pair, cc_string, path_product, string_f_polynomial, verify_exchange, walls_along, TruncSeries,
    DEFAULT_ORDER,
};
use orbicluster::fixtures::{digon, read_json};
use orbicluster::genseed::explore_exchange_graph;
use orbicluster::gentlerep::{
    check_relations, hom_dim, min_presentation, reflect, string_module, string_of, tau_rigid_pair, QuiverRep,
    Reflection, RepJson, Walk,
};
use orbicluster::orbsurf::{flip_graph, PotentialTerm};
use orbicluster::stability::{chamber_path, render_chambers};
use orbicluster::taufan::{check_fan, stau_exchange_graph, AirContext, PairFile, TauRigidPair, DEFAULT_MAX_STRING_LEN};
use orbicluster::tropical::{render_tables, TropicalState};
use orbicluster::{quiver_of, ExchangeMatrix, GenSeed, QuiverWithPotential, SeedSpec, Triangulation};

#[derive(Parser)]
#[command(name = "orbicluster", version, about = "Generalized cluster algebras of triangulated orbifolds")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for exploration.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Longest string tried when realizing g-vectors.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STRING_LEN)]
    max_string_len: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Mutate a seed along a path.
    Mutate {
        /// Seed JSON ({"b", "r", "theta"?, "cluster"?}); defaults to B(κ_0).
        #[arg(long)]
        seed: Option<PathBuf>,
        #[arg(long, default_value = "")]
        path: String,
    },
    /// Breadth-first exchange graph of a seed, or flip graph of a surface.
    Explore {
        #[arg(long)]
        seed: Option<PathBuf>,
        /// Explore triangulations by flips instead of seeds.
        #[arg(long, conflicts_with = "seed")]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// c-, g-vectors and F-polynomials along a path.
    Tropical {
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, default_value = "")]
        path: String,
    },
    /// Triangulation utilities.
    Surface {
        #[command(subcommand)]
        action: SurfaceCmd,
    },
    /// Module utilities over the Jacobian algebra of a triangulation.
    Rep {
        #[arg(long, global = true)]
        surface: Option<PathBuf>,
        #[command(subcommand)]
        action: RepCmd,
    },
    /// Support τ-tilting exchange graph from (0, P).
    Stau {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Stability chambers carried by T^± maps along a flip path.
    Chambers {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long)]
        path: String,
    },
    /// Path-ordered wall crossing compared with x^g F(y).
    Scatter {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Caldero–Chapoton functions of the summands of a pair.
    Cc {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long)]
        pair: PathBuf,
    },
    /// Exchange identities of CC functions at every explored pair.
    VerifyExchange {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// End-to-end reproduction of the digon example.
    VerifyMain {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    Validate {
        file: PathBuf,
    },
    Quiver {
        file: PathBuf,
    },
    Flip {
        file: PathBuf,
        /// Arc id (1-based).
        #[arg(long)]
        arc: usize,
    },
}

/// Modules are JSON files, or strings written `@v a b^-1 …`.
#[derive(Subcommand)]
enum RepCmd {
    Check {
        module: String,
    },
    Hom {
        from: String,
        to: String,
    },
    Gvec {
        module: String,
    },
    /// F-polynomial and CC function of a string module.
    Fpoly {
        module: String,
    },
    Taurigid {
        module: String,
        /// Projective summands P_i of the pair, 1-based.
        #[arg(long, default_value = "")]
        proj: String,
    },
    Reflect {
        module: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

/// Failure of a run: `Check` means the computation finished but a check failed.
pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<orbicluster::Error> for Failure {
    fn from(e: orbicluster::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Check(out)) => {
            print!("{out}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn surface(p: &Option<PathBuf>) -> Result<Triangulation, Failure> {
    let t = match p {
        Some(p) => read_file(p)?,
        None => digon(0)?,
    };
    t.validate()?;
    Ok(t)
}

fn seed_spec(p: &Option<PathBuf>) -> Result<SeedSpec, Failure> {
    match p {
        Some(p) => read_file(p),
        None => Ok(read_json("b_kappa0.json")?),
    }
}

/// Parses a comma-separated list of 1-based indices into 0-based ones.
fn parse_path(s: &str, n: usize) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(k) if (1..=n).contains(&k) => Ok(k - 1),
            _ => Err(Failure::Usage(format!("bad index '{t}' in path (rank {n})"))),
        })
        .collect()
}

fn one_based(p: &[usize]) -> String {
    if p.is_empty() {
        "-".into()
    } else {
        p.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

fn module(q: &QuiverWithPotential, arg: &str) -> Result<QuiverRep, Failure> {
    if arg.trim_start().starts_with('@') {
        Ok(string_module(q, &Walk::parse(q, arg)?)?)
    } else {
        let j: RepJson = read_file(Path::new(arg))?;
        Ok(QuiverRep::from_json(q, &j)?)
    }
}

fn render_matrix(b: &[Vec<i64>]) -> String {
    format!("{b:?}")
}

fn run(cli: &Cli) -> Run {
    let g = &cli.global;
    match &cli.command {
        Command::Mutate { seed, path } => mutate(g, seed, path),
        Command::Explore { seed, surface: s, depth } => match s {
            Some(_) => explore_flips(g, &surface(s)?, *depth),
            None => explore_seeds(g, seed, *depth),
        },
        Command::Tropical { b, path } => tropical(g, b, path),
        Command::Surface { action } => surface_cmd(g, action),
        Command::Rep { surface: s, action } => rep_cmd(g, &surface(s)?, action),
        Command::Stau { surface: s, depth } => stau(g, &surface(s)?, *depth),
        Command::Chambers { surface: s, path } => chambers(g, &surface(s)?, path),
        Command::Scatter { surface: s, path, order } => scatter(g, &surface(s)?, path, *order),
        Command::Cc { surface: s, pair } => cc(g, &surface(s)?, pair),
        Command::VerifyExchange { surface: s, depth } => verify_exchange_cmd(g, &surface(s)?, *depth),
        Command::VerifyMain { surface: s, depth, order } => verify::verify_main(g, &surface(s)?, *depth, *order),
    }
}

fn mutate(g: &Global, seed: &Option<PathBuf>, path: &str) -> Run {
    let spec = seed_spec(seed)?;
    let s0 = spec.to_seed()?;
    let p = parse_path(path, s0.rank())?;
    let s = s0.mutate_path(&p)?;
    let names = spec.names();
    let cluster: Vec<String> = s.cluster.iter().map(|x| x.render_names(&names)).collect();
    Ok(match g.format {
        Format::Json => json!({"path": p.iter().map(|k| k + 1).collect::<Vec<_>>(), "b": s.matrix.b, "r": s.matrix.r, "cluster": cluster})
            .to_string()
            + "\n",
        _ => {
            let mut out = format!("path: {}\nB = {}\n", one_based(&p), render_matrix(&s.matrix.b));
            for (i, c) in cluster.iter().enumerate() {
                writeln!(out, "x{}' = {c}", i + 1).unwrap();
            }
            out
        }
    })
}

fn explore_seeds(g: &Global, seed: &Option<PathBuf>, depth: usize) -> Run {
    let spec = seed_spec(seed)?;
    let graph = explore_exchange_graph(&spec.to_seed()?, depth, g.jobs)?;
    let names = spec.names();
    let cluster = |s: &GenSeed| s.cluster.iter().map(|x| x.render_names(&names)).collect::<Vec<_>>();
    Ok(match g.format {
        Format::Dot => graph.to_dot(),
        Format::Json => {
            let nodes: Vec<_> = graph
                .nodes
                .iter()
                .map(|n| json!({"depth": n.depth, "cluster": cluster(&n.seed), "b": n.seed.matrix.b}))
                .collect();
            let edges: Vec<_> = graph.edges.iter().map(|e| json!([e.a, e.b, e.ka + 1, e.kb + 1])).collect();
            json!({"nodes": nodes, "edges": edges}).to_string() + "\n"
        }
        Format::Text => {
            let mut out = format!("nodes: {}\nedges: {}\n", graph.nodes.len(), graph.edges.len());
            for (i, n) in graph.nodes.iter().enumerate() {
                writeln!(out, "n{i} (depth {}): {}", n.depth, cluster(&n.seed).join(" | ")).unwrap();
            }
            for e in &graph.edges {
                writeln!(out, "n{} -- n{} [{}|{}]", e.a, e.b, e.ka + 1, e.kb + 1).unwrap();
            }
            out
        }
    })
}

fn explore_flips(g: &Global, t: &Triangulation, depth: usize) -> Run {
    let graph = flip_graph(t, depth, g.jobs)?;
    let arcs = |s: &orbicluster::orbsurf::FlipState| s.labels.iter().map(|l| l.render("x")).collect::<Vec<_>>();
    Ok(match g.format {
        Format::Dot => {
            let mut s = String::from("graph flips {\n");
            for (i, (st, _)) in graph.nodes.iter().enumerate() {
                writeln!(s, "  n{i} [label=\"{}\"];", arcs(st).join("\\n")).unwrap();
            }
            for e in &graph.edges {
                writeln!(s, "  n{} -- n{} [label=\"{}\"];", e.a, e.b, e.ka + 1).unwrap();
            }
            s + "}\n"
        }
        Format::Json => {
            let nodes: Vec<_> = graph
                .nodes
                .iter()
                .map(|(st, d)| json!({"depth": d, "arcs": arcs(st), "triangulation": st.triangulation}))
                .collect();
            let edges: Vec<_> = graph.edges.iter().map(|e| json!([e.a, e.b, e.ka + 1])).collect();
            json!({"nodes": nodes, "edges": edges}).to_string() + "\n"
        }
        Format::Text => {
            let mut out = format!("triangulations: {}\nflips: {}\n", graph.nodes.len(), graph.edges.len());
            for (i, (st, d)) in graph.nodes.iter().enumerate() {
                writeln!(out, "n{i} (depth {d}): {}", arcs(st).join(" | ")).unwrap();
            }
            for e in &graph.edges {
                writeln!(out, "n{} -- n{} [arc {}]", e.a, e.b, e.ka + 1).unwrap();
            }
            out
        }
    })
}

fn tropical(g: &Global, b: &Option<PathBuf>, path: &str) -> Run {
    let m: ExchangeMatrix = match b {
        Some(p) => read_file(p)?,
        None => read_json("b_kappa0.json")?,
    };
    m.validate()?;
    let p = parse_path(path, m.rank())?;
    let s = TropicalState::walk(m, &p)?;
    Ok(match g.format {
        Format::Json => {
            let f: Vec<String> = s.f.iter().map(|f| f.to_string()).collect();
            json!({"path": p.iter().map(|k| k + 1).collect::<Vec<_>>(), "c": s.c, "g": s.g, "f": f, "b": s.b.b})
                .to_string()
                + "\n"
        }
        _ => render_tables(&s),
    })
}

fn render_quiver(q: &QuiverWithPotential) -> String {
    let mut out = format!("vertices: {}\n", (1..=q.n).map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
    let pending: Vec<String> = (0..q.n).filter(|&i| q.pending[i]).map(|i| (i + 1).to_string()).collect();
    writeln!(out, "pending: {}", if pending.is_empty() { "-".into() } else { pending.join(" ") }).unwrap();
    for a in &q.arrows {
        writeln!(out, "arrow {}: {} -> {}", a.id, a.tail + 1, a.head + 1).unwrap();
    }
    let terms: Vec<String> = q
        .potential
        .iter()
        .map(|t| match t {
            PotentialTerm::Cycle(c) => c.iter().map(|&a| q.arrows[a].id.clone()).collect::<Vec<_>>().join("·"),
            PotentialTerm::LoopCube(a) => format!("{}^3", q.arrows[*a].id),
        })
        .collect();
    writeln!(out, "potential: {}", if terms.is_empty() { "0".into() } else { terms.join(" + ") }).unwrap();
    for r in &q.relations {
        writeln!(out, "relation: {} then {}", q.arrows[r.first].id, q.arrows[r.then].id).unwrap();
    }
    writeln!(out, "B = {}\nr = {:?}", render_matrix(&q.matrix.b), q.matrix.r).unwrap();
    out
}

fn surface_cmd(g: &Global, action: &SurfaceCmd) -> Run {
    match action {
        SurfaceCmd::Validate { file } => {
            let t: Triangulation = read_file(file)?;
            let diags = t.diagnostics();
            let out: String = diags.iter().map(|d| format!("{d}\n")).collect();
            if diags.is_empty() {
                Ok("ok\n".into())
            } else {
                Err(Failure::Check(out))
            }
        }
        SurfaceCmd::Quiver { file } => {
            let t: Triangulation = read_file(file)?;
            let q = t.quiver()?;
            q.gentle_audit()?;
            Ok(match g.format {
                Format::Json => json!({"b": q.matrix.b, "r": q.matrix.r}).to_string() + "\n",
                _ => render_quiver(&q),
            })
        }
        SurfaceCmd::Flip { file, arc } => {
            let t: Triangulation = read_file(file)?;
            t.validate()?;
            let f = t.flip(*arc)?;
            Ok(serde_json::to_string_pretty(&f).map_err(|e| Failure::Usage(e.to_string()))? + "\n")
        }
    }
}

fn rep_cmd(g: &Global, t: &Triangulation, action: &RepCmd) -> Run {
    let q = t.quiver()?;
    let q = &q;
    match action {
        RepCmd::Check { module: m } => {
            let m = module(q, m).map_err(|e| match e {
                Failure::Usage(s) => Failure::Check(format!("{s}\n")),
                c => c,
            })?;
            match check_relations(&m, q) {
                Ok(()) => Ok(format!("ok: {m}\n")),
                Err(e) => Err(Failure::Check(format!("{e}\n"))),
            }
        }
        RepCmd::Hom { from, to } => {
            let (a, b) = (module(q, from)?, module(q, to)?);
            Ok(format!("{}\n", hom_dim(&a, &b, q)))
        }
        RepCmd::Gvec { module: m } => {
            let m = module(q, m)?;
            let p = min_presentation(&m, q)?;
            Ok(match g.format {
                Format::Json => json!({"p1": p.p1, "p0": p.p0, "g": p.g_vector()}).to_string() + "\n",
                _ => format!("P1 = {:?}\nP0 = {:?}\ng = {:?}\n", p.p1, p.p0, p.g_vector()),
            })
        }
        RepCmd::Fpoly { module: m } => {
            let m = module(q, m)?;
            let w = string_of(q, &m, m.total_dim()).ok_or_else(|| Failure::Usage("not a string module".into()))?;
            let f = string_f_polynomial(q, &w)?;
            let c = cc_string(q, &q.matrix, &w)?;
            Ok(match g.format {
                Format::Json => {
                    json!({"string": w.render(q), "f": f.to_string(), "cc": c.to_string()}).to_string() + "\n"
                }
                _ => format!("string {}\nF = {f}\nCC = {c}\n", w.render(q)),
            })
        }
        RepCmd::Taurigid { module: m, proj } => {
            let m = module(q, m)?;
            let proj = parse_path(proj, q.n)?;
            if tau_rigid_pair(&m, &proj, q)? {
                Ok("tau-rigid\n".into())
            } else {
                Err(Failure::Check("not tau-rigid\n".into()))
            }
        }
        RepCmd::Reflect { module: m, k, sign } => {
            let m = module(q, m)?;
            let k = parse_path(&k.to_string(), q.n)?[0];
            let s = match sign {
                SignArg::Plus => Reflection::Plus,
                SignArg::Minus => Reflection::Minus,
            };
            let (fm, sigma) = reflect(t, &m, k, s)?;
            let qs = sigma.quiver()?;
            Ok(match g.format {
                Format::Json => {
                    serde_json::to_string_pretty(&fm.to_json(&qs)).map_err(|e| Failure::Usage(e.to_string()))? + "\n"
                }
                _ => {
                    let name = string_of(&qs, &fm, fm.total_dim()).map_or_else(|| "-".to_string(), |w| w.render(&qs));
                    format!("dims {:?}\nstring {name}\n", fm.dims)
                }
            })
        }
    }
}

fn stau(g: &Global, t: &Triangulation, depth: usize) -> Run {
    let ctx = AirContext::new(t, g.max_string_len)?;
    let graph = stau_exchange_graph(&ctx, &ctx.initial_pair(), depth, g.jobs)?;
    check_fan(&graph)?;
    Ok(match g.format {
        Format::Dot => graph.to_dot(),
        Format::Json => {
            let nodes: Vec<_> = graph
                .nodes
                .iter()
                .map(|(p, _, d)| json!({"depth": d, "gvectors": p.gvectors, "pair": p.to_file(0, &ctx.quiver)}))
                .collect();
            let edges: Vec<_> = graph.edges.iter().map(|e| json!([e.a, e.b, e.ka + 1])).collect();
            json!({"nodes": nodes, "edges": edges}).to_string() + "\n"
        }
        Format::Text => {
            let mut out = format!("pairs: {}\nmutations: {}\n", graph.nodes.len(), graph.edges.len());
            for (i, (p, _, d)) in graph.nodes.iter().enumerate() {
                writeln!(out, "n{i} (depth {d})").unwrap();
                for line in p.render(&ctx.quiver).lines() {
                    writeln!(out, "  {line}").unwrap();
                }
            }
            for e in &graph.edges {
                writeln!(out, "n{} -- n{} [{}]", e.a, e.b, e.ka + 1).unwrap();
            }
            out
        }
    })
}

fn chambers(g: &Global, t: &Triangulation, path: &str) -> Run {
    let p = parse_path(path, t.rank())?;
    let c = chamber_path(t, &p)?;
    Ok(match g.format {
        Format::Json => serde_json::to_string(&c).map_err(|e| Failure::Usage(e.to_string()))? + "\n",
        _ => render_chambers(&c),
    })
}

fn scatter(g: &Global, t: &Triangulation, path: &str, order: usize) -> Run {
    let root = quiver_of(t).matrix;
    let p = parse_path(path, t.rank())?;
    let walls = walls_along(&root, &p)?;
    let st = TropicalState::walk(root.clone(), &p)?;
    let bbar = bbar_matrix(&root);
    let mut ok = true;
    let mut rows = Vec::new();
    for i in 0..root.rank() {
        let got = path_product(&walls, &bbar, &TruncSeries::x_pow(&st.g[i], order));
        let want = TruncSeries::from_x_times_f(&st.g[i], &st.f[i], order);
        ok &= got == want;
        rows.push((got, want));
    }
    let out = match g.format {
        Format::Json => {
            let walls: Vec<_> =
                walls.iter().map(|(w, e)| json!({"normal": w.d, "coeffs": w.coeffs, "sign": e})).collect();
            let rows: Vec<_> = rows
                .iter()
                .map(|(a, b)| json!({"product": a.to_string(), "expected": b.to_string(), "equal": a == b}))
                .collect();
            json!({"walls": walls, "rows": rows, "ok": ok}).to_string() + "\n"
        }
        _ => {
            let mut out = String::new();
            for (j, (w, e)) in walls.iter().enumerate() {
                writeln!(out, "wall {}: normal {:?} coeffs {:?} sign {e:+}", j + 1, w.d, w.coeffs).unwrap();
            }
            for (i, (a, b)) in rows.iter().enumerate() {
                writeln!(out, "p(x^g{}) = {a}", i + 1).unwrap();
                if a != b {
                    writeln!(out, "expected  {b}").unwrap();
                }
            }
            writeln!(out, "{}", if ok { "consistent" } else { "MISMATCH" }).unwrap();
            out
        }
    };
    if ok {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}

fn cc(g: &Global, t: &Triangulation, pair: &Path) -> Run {
    let ctx = AirContext::new(t, g.max_string_len)?;
    let f: PairFile = read_file(pair)?;
    let p = TauRigidPair::from_file(&f, &ctx.quiver)?;
    ctx.verify(&p)?;
    let ccs = cc_pair(&ctx, &p)?;
    Ok(match g.format {
        Format::Json => {
            json!({"gvectors": p.gvectors, "cc": ccs.iter().map(|c| c.to_string()).collect::<Vec<_>>()}).to_string()
                + "\n"
        }
        _ => ccs.iter().enumerate().map(|(i, c)| format!("CC{} = {c}\n", i + 1)).collect(),
    })
}

fn verify_exchange_cmd(g: &Global, t: &Triangulation, depth: usize) -> Run {
    let ctx = AirContext::new(t, g.max_string_len)?;
    let graph = stau_exchange_graph(&ctx, &ctx.initial_pair(), depth, g.jobs)?;
    let mut out = String::new();
    let (mut checked, mut failed) = (0, 0);
    for (i, (p, _, _)) in graph.nodes.iter().enumerate() {
        for k in 0..ctx.rank() {
            let c = verify_exchange(&ctx, p, k)?;
            checked += 1;
            if !c.holds {
                failed += 1;
                writeln!(out, "n{i} k={}:\n  lhs {}\n  rhs {}", k + 1, c.lhs, c.rhs).unwrap();
            }
        }
    }
    writeln!(out, "pairs: {}\nidentities checked: {checked}\nfailures: {failed}", graph.nodes.len()).unwrap();
    if failed == 0 {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}
