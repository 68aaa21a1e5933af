mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use recur_core::diagram::{self, MarkovDiagram, DIAGRAM_SCHEMA};
use recur_core::interval::{check_transitive_with, Transitivity, TRANSITIVITY_CAP, TRANSITIVITY_GRID};
use recur_core::moran::{self, DimMode, MoranPoint, LEDGER_SCHEMA, PREFIX_SCHEMA};
use recur_core::recurrence::{self, Sampler};
use recur_core::schedule::{self, make_schedule, Ext, Tolerances};
use recur_core::{load_model, AlphaBeta, SubshiftModel, Word};

use output::{manifest_for, Doc, Record, Run, Table};

#[derive(Parser)]
#[command(name = "recur", version, about = "Symbolic dynamics and recurrence toolkit")]
struct Cli {
    /// Emit JSON objects instead of CSV/text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Subshift languages.
    #[command(subcommand)]
    Lang(LangCmd),
    /// Alpha-beta transformations.
    #[command(subcommand)]
    Map(MapCmd),
    /// Markov diagrams.
    #[command(subcommand)]
    Diagram(DiagramCmd),
    /// First-return times.
    #[command(subcommand)]
    Recur(RecurCmd),
    /// Insertion schedules.
    #[command(subcommand)]
    Schedule(ScheduleCmd),
    /// Moran-point construction.
    #[command(subcommand)]
    Moran(MoranCmd),
}

#[derive(Subcommand)]
enum LangCmd {
    /// List the admissible words of length N.
    Enum {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// log(#L_n)/n for n up to NMAX.
    Entropy {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MapArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    #[arg(long)]
    beta: String,
}

impl MapArgs {
    fn map(&self) -> Result<AlphaBeta> {
        Ok(AlphaBeta::parse(&self.alpha, &self.beta)?)
    }
}

#[derive(Subcommand)]
enum MapCmd {
    /// Orbit and digits of x.
    Digits {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a transitivity certificate.
    Transitive {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = TRANSITIVITY_GRID)]
        grid: usize,
        #[arg(long, default_value_t = TRANSITIVITY_CAP)]
        cap: usize,
    },
    /// Exact interval of the cylinder of a word.
    Cylinder {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        word: String,
    },
}

#[derive(Subcommand)]
enum DiagramCmd {
    /// Build the diagram to depth N and dump it.
    Build {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "N")]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap size of the chosen component.
    Gap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "N")]
        depth: usize,
    },
    /// Empirical (W') check over good words of length <= L.
    Wprime {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "N", default_value_t = 8)]
        depth: usize,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value_t = 4)]
        tcap: usize,
    },
}

#[derive(Subcommand)]
enum RecurCmd {
    /// tau_n and log(tau_n)/n along one prefix.
    Trace {
        /// Prefix file (`recur-prefix/1`).
        #[arg(long, conflicts_with_all = ["model", "seed"])]
        input: Option<PathBuf>,
        /// Sample a prefix from this model instead.
        #[arg(long, requires = "seed")]
        model: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Length of the sampled prefix.
        #[arg(long, default_value_t = 100_000)]
        len: usize,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ornstein-Weiss experiment for a Bernoulli source.
    Ow {
        /// Comma-separated probabilities.
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScheduleCmd {
    /// Generate and validate a schedule.
    Make {
        #[arg(long)]
        a: Ext,
        #[arg(long)]
        b: Ext,
        #[arg(long = "P")]
        terms: usize,
        /// Shift indices for block length K (with --t).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        t: usize,
        #[arg(long, default_value_t = Tolerances::default().rel)]
        rel: f64,
        #[arg(long, default_value_t = Tolerances::default().small)]
        small: f64,
        #[arg(long, default_value_t = Tolerances::default().large)]
        large: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct BuildArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    a: Ext,
    #[arg(long)]
    b: Ext,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    target: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Schedule terms before the index shift.
    #[arg(long = "P", default_value_t = 200)]
    terms: usize,
    /// Markov diagram depth.
    #[arg(long = "N", default_value_t = 8)]
    depth: usize,
}

#[derive(Subcommand)]
enum MoranCmd {
    /// Construct a point and write prefix, ledger and verification table.
    Build(BuildArgs),
    /// Re-check a built point.
    Verify {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Dimension lower bound for the seed configuration of a built point.
    Dim {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        interval: bool,
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("error: bad arguments"));
            return ExitCode::from(1);
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let budget = e.downcast_ref::<recur_core::Error>().is_some_and(|c| c.is_budget());
            let msg = format!("{e:#}").replace('\n', "; ");
            eprintln!("error: {msg}");
            ExitCode::from(if budget { 2 } else { 1 })
        }
    }
}

fn f(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::from(if x.is_nan() { "nan".to_string() } else if x > 0.0 { "inf".into() } else { "-inf".into() })
    }
}

fn emit(doc: Doc, json: bool, out: Option<&Path>, mut run: Run) -> Result<()> {
    let text = doc.render(json)?;
    match out {
        Some(path) => {
            run.write(path, doc.schema(), &text)?;
            run.finish(&manifest_for(path))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    let json = cli.json;
    let name = argv.iter().skip(1).filter(|a| !a.starts_with('-')).take(2).cloned().collect::<Vec<_>>().join(" ");
    let run = Run::new(&name, argv);
    match cli.cmd {
        Cmd::Lang(c) => lang(c, json, run),
        Cmd::Map(c) => map(c, json, run),
        Cmd::Diagram(c) => diagram_cmd(c, json, run),
        Cmd::Recur(c) => recur(c, json, run),
        Cmd::Schedule(c) => schedule_cmd(c, json, run),
        Cmd::Moran(c) => moran_cmd(c, json, run),
    }
}

fn lang(c: LangCmd, json: bool, run: Run) -> Result<()> {
    match c {
        LangCmd::Enum { model, n, out } => {
            let model = load_model(&model)?;
            let slice = model.enumerate_language(n)?;
            let mut t = Table::new("recur-lang-enum/1", vec!["index", "word"], vec!["index=1-based ordinal", "word=symbols"]);
            t.note("n", n);
            t.note("count", slice.count);
            for (i, w) in slice.words.iter().enumerate() {
                t.push(vec![json!(i + 1), json!(w.to_cli_string())]);
            }
            emit(Doc::Table(t), json, out.as_deref(), run)
        }
        LangCmd::Entropy { model, nmax, out } => {
            let model = load_model(&model)?;
            let counts = model.count_language(nmax)?;
            let est = model.entropy_estimate(nmax)?;
            let mut t = Table::new(
                "recur-lang-entropy/1",
                vec!["n", "count", "rate"],
                vec!["n=symbols", "count=words", "rate=nats per symbol"],
            );
            t.note("estimate", f(est.estimate));
            for (n, rate) in est.points {
                t.push(vec![json!(n), json!(counts[n].to_string()), f(rate)]);
            }
            emit(Doc::Table(t), json, out.as_deref(), run)
        }
    }
}

fn map(c: MapCmd, json: bool, run: Run) -> Result<()> {
    match c {
        MapCmd::Digits { map, x, n, out } => {
            let m = map.map()?;
            let tr = m.digits(x, n)?;
            let mut t = Table::new(
                "recur-map-digits/1",
                vec!["k", "orbit_x", "digit", "flag"],
                vec!["k=1-based iterate", "orbit_x=T^(k-1)(x) in [0,1)", "digit=branch index", "flag=1 near a branch endpoint"],
            );
            t.note("unreliable_from", tr.unreliable_from.map_or(Value::Null, |u| json!(u)));
            for (i, &d) in tr.digits.symbols().iter().enumerate() {
                t.push(vec![json!(i + 1), f(tr.orbit[i]), json!(d), json!(u8::from(tr.flags[i]))]);
            }
            emit(Doc::Table(t), json, out.as_deref(), run)
        }
        MapCmd::Transitive { map, grid, cap } => {
            let m = map.map()?;
            let mut r = Record::new("recur-transitive/1");
            r.set("alpha", map.alpha.clone());
            r.set("beta", map.beta.clone());
            match check_transitive_with(&m, grid, cap) {
                Transitivity::Transitive { certificates } => {
                    r.set("status", "transitive");
                    r.set("certificates", certificates.len());
                    let worst = certificates.iter().map(|c| c.iterations).max().unwrap_or(0);
                    r.set("max_iterations", worst);
                    if json {
                        r.set("detail", serde_json::to_value(&certificates)?);
                    }
                }
                Transitivity::Inconclusive { reason, succeeded, tried } => {
                    r.set("status", "inconclusive");
                    r.set("reason", reason);
                    r.set("succeeded", succeeded);
                    r.set("tried", tried);
                }
            }
            emit(Doc::Record(r), json, None, run)
        }
        MapCmd::Cylinder { map, word } => {
            let m = map.map()?;
            let w = Word::parse(m.branches(), &word)?;
            let mut r = Record::new("recur-cylinder/1");
            r.set("word", w.to_cli_string());
            match m.cylinder_interval(&w)? {
                Some(iv) => {
                    let (lo, hi) = iv.to_f64();
                    r.set("lo", iv.lo.to_string());
                    r.set("hi", iv.hi.to_string());
                    r.set("lo_f64", f(lo));
                    r.set("hi_f64", f(hi));
                    r.set("length", f(hi - lo));
                }
                None => r.set("empty", true),
            }
            emit(Doc::Record(r), json, None, run)
        }
    }
}

fn decomposed(model: &Path, depth: usize) -> Result<(MarkovDiagram, diagram::Decomposition)> {
    let model = load_model(model)?;
    let d = MarkovDiagram::build(&model, depth)?;
    let dec = diagram::irreducible_component(&d)?;
    Ok((d, dec))
}

fn diagram_cmd(c: DiagramCmd, json: bool, run: Run) -> Result<()> {
    match c {
        DiagramCmd::Build { model, depth, out } => {
            let model = load_model(&model)?;
            let d = MarkovDiagram::build(&model, depth)?;
            let doc = if json {
                let mut r = Record::new(DIAGRAM_SCHEMA);
                r.set("depth", d.built_to());
                r.set(
                    "vertices",
                    d.vertices()
                        .iter()
                        .map(|v| json!({"id": v.id, "level": v.level, "symbol": v.symbol, "state": v.state.to_string()}))
                        .collect::<Vec<_>>(),
                );
                let edges: Vec<Value> = (0..d.len())
                    .flat_map(|i| d.edges(i).iter().map(move |&(s, j)| json!({"src": i, "symbol": s, "dst": j})))
                    .collect();
                r.set("edges", edges);
                Doc::Record(r)
            } else {
                Doc::Text { schema: DIAGRAM_SCHEMA, text: d.to_dump() }
            };
            emit(doc, json, out.as_deref(), run)
        }
        DiagramCmd::Gap { model, depth } => {
            let (d, dec) = decomposed(&model, depth)?;
            let gap = diagram::gap_size(&d, &dec)?;
            let mut r = Record::new("recur-diagram-gap/1");
            r.set("depth", depth);
            r.set("vertices", d.len());
            r.set("core", dec.core.len());
            r.set("component", dec.component.len());
            r.set("spectral_radius", f(dec.spectral_radius));
            r.set("gap_size", gap);
            r.set("connector_length", gap.saturating_sub(1));
            emit(Doc::Record(r), json, None, run)
        }
        DiagramCmd::Wprime { model, depth, l, tcap } => {
            let (d, dec) = decomposed(&model, depth)?;
            let rep = diagram::verify_w_prime(&d, &dec, l, tcap)?;
            let mut r = Record::new("recur-wprime/1");
            r.set("L", l);
            r.set("good_blocks", rep.good_blocks);
            r.set("passed", rep.passed());
            r.set("t", rep.t.map_or(Value::Null, |t| json!(t)));
            let tried: Vec<String> = rep.tried.iter().map(|(t, ok)| format!("{t}:{}", if *ok { "pass" } else { "fail" })).collect();
            r.set("tried", tried.join(" "));
            if let Some((u, v)) = &rep.counterexample {
                r.set("counterexample_u", u.to_cli_string());
                r.set("counterexample_v", v.to_cli_string());
            }
            emit(Doc::Record(r), json, None, run)
        }
    }
}

fn recur(c: RecurCmd, json: bool, mut run: Run) -> Result<()> {
    match c {
        RecurCmd::Trace { input, model, seed, len, nmax, out } => {
            let x = match (input, model) {
                (Some(p), _) => moran::parse_prefix(&read(&p)?)?,
                (None, Some(m)) => {
                    let seed = seed.ok_or_else(|| anyhow!("--model needs --seed"))?;
                    run.seed = Some(seed);
                    let model = load_model(&m)?;
                    model.random_word(&mut ChaCha8Rng::seed_from_u64(seed), len)?
                }
                (None, None) => bail!("give --input FILE or --model FILE --seed S"),
            };
            let tr = recurrence::trace(&x, nmax)?;
            let mut t = Table::new(
                "recur-trace/1",
                vec!["n", "tau", "ratio", "determined"],
                vec!["n=symbols", "tau=shift steps (lower bound when undetermined)", "ratio=log(tau)/n nats per symbol", "determined=0/1"],
            );
            t.note("prefix_len", tr.prefix_len);
            for e in &tr.entries {
                let (tau, det) = match e.tau {
                    recurrence::ReturnTime::Determined(v) => (v, 1),
                    recurrence::ReturnTime::Undetermined { exceeds } => (exceeds, 0),
                };
                t.push(vec![json!(e.n), json!(tau), e.ratio.map_or(Value::Null, f), json!(det)]);
            }
            emit(Doc::Table(t), json, out.as_deref(), run)
        }
        RecurCmd::Ow { dist, n, samples, horizon, seed, out } => {
            let p: Vec<f64> = dist
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("bad probability {s:?}")))
                .collect::<Result<_>>()?;
            run.seed = Some(seed);
            let s = recurrence::ornstein_weiss_experiment(&Sampler::Bernoulli(p), n, samples, horizon, seed)?;
            let cap = (horizon as f64).ln() / n as f64;
            let mut t = Table::new(
                "recur-ow/1",
                vec!["sample", "ratio", "censored"],
                vec!["sample=0-based stream index", "ratio=log(tau_n)/n nats per symbol", "censored=0/1 (ratio is log(horizon)/n)"],
            );
            for (k, v) in [("median", s.median), ("mean", s.mean), ("q1", s.q1), ("q3", s.q3), ("entropy", s.entropy)] {
                t.note(k, f(v));
            }
            t.note("censored", s.censored);
            t.note("seed", seed);
            for (i, &r) in s.ratios.iter().enumerate() {
                t.push(vec![json!(i), f(r), json!(u8::from(r >= cap))]);
            }
            emit(Doc::Table(t), json, out.as_deref(), run)
        }
    }
}

fn schedule_cmd(c: ScheduleCmd, json: bool, run: Run) -> Result<()> {
    let ScheduleCmd::Make { a, b, terms, k, t, rel, small, large, out } = c;
    let mut s = make_schedule(a, b, terms)?;
    if let Some(k) = k {
        s = s.shift_indices(k, t)?;
    }
    let rep = schedule::validate_with(&s, Tolerances { rel, small, large })?;
    let mut tab = Table::new(
        "recur-schedule/1",
        vec!["p", "ell", "gamma", "gamma_ell", "exp_gamma_ell_log", "log_ell"],
        vec![
            "p=index after shift",
            "ell=symbols",
            "gamma=nats per symbol",
            "gamma_ell=nats",
            "exp_gamma_ell_log=log(gamma ell)",
            "log_ell=log(ell)",
        ],
    );
    tab.note("case", format!("{:?}", s.case));
    tab.note("index_shift", s.index_shift);
    tab.note("e_violations", s.e_violations().len());
    for ch in &rep.checks {
        tab.note(&format!("check_{}", ch.name), format!("{} {}", if ch.pass { "pass" } else { "FAIL" }, ch.detail));
    }
    for p in 1..=s.len() {
        let lge = s.log_gamma_ell(p);
        tab.push(vec![json!(p), f(s.ell(p)), f(s.gamma(p)), f(s.gamma_ell(p)), f(lge), f(s.log_ell[p - 1])]);
    }
    emit(Doc::Table(tab), json, out.as_deref(), run)
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn schedule_for(args: &BuildArgs, k: usize, t: usize) -> Result<schedule::Schedule> {
    Ok(make_schedule(args.a, args.b, args.terms)?.shift_indices(k, t)?)
}

fn verify_table(pt: &MoranPoint) -> Result<Table> {
    let rep = moran::verify_point(pt)?;
    let mut t = Table::new(
        "recur-moran-verify/1",
        vec!["p", "original_p", "n", "parity", "tau", "gamma_ell", "upper", "eta", "ratio"],
        vec![
            "p=checkpoint index",
            "original_p=unshifted index",
            "n=|theta^p| symbols",
            "parity=odd/even of original_p",
            "tau=shift steps",
            "gamma_ell=nats",
            "upper=shift steps",
            "eta=relative excess",
            "ratio=log(tau)/n nats per symbol",
        ],
    );
    t.note("prefix_len", pt.prefix.len());
    t.note("checkpoints", rep.checkpoints.len());
    t.note("piecewise_checked", rep.piecewise_checked);
    t.note("last_odd_ratio", rep.last_odd_ratio.map_or(Value::Null, f));
    t.note("last_even_ratio", rep.last_even_ratio.map_or(Value::Null, f));
    for c in &rep.checkpoints {
        t.push(vec![
            json!(c.p),
            json!(c.original_p),
            json!(c.n),
            json!(if c.odd { "odd" } else { "even" }),
            json!(c.tau),
            f(c.gamma_ell),
            f(c.upper),
            f(c.eta),
            f(c.ratio),
        ]);
    }
    Ok(t)
}

fn load_point(dir: &Path) -> Result<MoranPoint> {
    let prefix = moran::parse_prefix(&read(&dir.join("prefix.txt"))?)?;
    Ok(MoranPoint::from_ledger(&read(&dir.join("ledger.txt"))?, prefix)?)
}

/// Original build arguments, recovered from the manifest's argv.
fn build_args(dir: &Path) -> Result<BuildArgs> {
    let m: Value = serde_json::from_str(&read(&dir.join("manifest.json"))?)?;
    let argv: Vec<String> = serde_json::from_value(m["argv"].clone()).context("manifest argv")?;
    match Cli::try_parse_from(&argv).map_err(|e| anyhow!("manifest argv: {}", e.to_string().lines().next().unwrap_or("")))?.cmd {
        Cmd::Moran(MoranCmd::Build(mut a)) => {
            a.model = dir.join("model.toml");
            Ok(a)
        }
        _ => bail!("manifest in {} is not from `moran build`", dir.display()),
    }
}

fn moran_cmd(c: MoranCmd, json: bool, mut run: Run) -> Result<()> {
    match c {
        MoranCmd::Build(args) => {
            schedule::Case::of(args.a, args.b)?;
            let model_text = read(&args.model)?;
            let model: SubshiftModel = recur_core::parse_model(&model_text)?;
            let cfg = moran::build_for_model(&model, args.k, args.depth, recur_core::budget::enumeration_budget())?;
            let sched = schedule_for(&args, cfg.k, cfg.t)?;
            let pt = moran::construct_point(&cfg, &sched, args.target, args.seed)?;
            run.seed = Some(args.seed);
            fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
            let dir = &args.out;
            run.write(&dir.join("model.toml"), recur_core::config::MODEL_SCHEMA, &model_text)?;
            run.write(&dir.join("prefix.txt"), PREFIX_SCHEMA, &moran::prefix_text(&pt.prefix))?;
            run.write(&dir.join("ledger.txt"), LEDGER_SCHEMA, &pt.ledger_text())?;
            let table = verify_table(&pt)?;
            run.write(&dir.join("verify.csv"), table.schema, &table.to_csv()?)?;
            run.finish(&dir.join("manifest.json"))?;
            let mut r = Record::new("recur-moran-build/1");
            r.set("dir", dir.display().to_string());
            r.set("k", cfg.k);
            r.set("t", cfg.t);
            r.set("q_count", cfg.q_k.len());
            r.set("v_star", cfg.v_star.to_cli_string());
            r.set("index_shift", sched.index_shift);
            r.set("length", pt.prefix.len());
            r.set("blocks", pt.q);
            r.set("checkpoints", pt.events.len());
            emit(Doc::Record(r), json, None, Run::new("", Vec::new()))
        }
        MoranCmd::Verify { dir } => {
            let pt = load_point(&dir)?;
            emit(Doc::Table(verify_table(&pt)?), json, None, run)
        }
        MoranCmd::Dim { dir, interval, q, samples } => {
            let args = build_args(&dir)?;
            let pt = load_point(&dir)?;
            let model = load_model(&args.model)?;
            let cfg = moran::build_for_model(&model, pt.k, args.depth, recur_core::budget::enumeration_budget())?;
            let sched = schedule_for(&args, cfg.k, cfg.t)?;
            let mode = if interval { DimMode::Interval { q_max: q, samples } } else { DimMode::Symbolic };
            let est = moran::dimension_lower_bound(&cfg, &sched, mode)?;
            let mut r = Record::new("recur-moran-dim/1");
            r.set("q_count", est.q_count);
            r.set("k", est.k);
            r.set("t", est.t);
            r.set("epsilon", f(est.epsilon));
            r.set("bound", f(est.bound));
            if let Some(iv) = &est.interval {
                r.set("entropy", f(iv.entropy));
                r.set("lyapunov", f(iv.lyapunov));
                r.set("closed_form", f(iv.closed_form));
                r.set("slope", f(iv.slope));
                let pts: Vec<String> = iv.points.iter().map(|(q, n, r)| format!("{q}:{n:.6}/{r:.6}")).collect();
                r.set("points", pts.join(" "));
            }
            emit(Doc::Record(r), json, None, run)
        }
    }
}
