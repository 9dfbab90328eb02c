//! `nba-lab`: exact measure-algebra computations from JSON inputs.
//!
//! Every run prints one canonical JSON envelope:
//! `{"command", "inputs_digest", "payload" | "error", "status"}`.
//! Exit codes: 0 success (UNKNOWN verdicts included), 2 malformed input, 3 refused
//! precondition, 1 internal failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nba_lab::filtration::{best_approximation, default_n_max, find_level, standard_filtration};
use nba_lab::json::{self, ModelJson, PartitionJson, RegionJson, SetJson};
use nba_lab::measure::{MeasureModel, Set};
use nba_lab::rational::{parse_q, Q};
use nba_lab::set_algebra::{AxisBox, Region};
use nba_lab::{classify, metric, oracle, svg, witness, Error};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "nba-lab", version, about = "Exact computations in measure algebras")]
struct Cli {
    /// Write the envelope here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Separability / compactness verdicts for both spaces.
    Classify {
        #[arg(long)]
        model: PathBuf,
    },
    /// Exact squared distance mu(A Δ B).
    Distance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Best approximation by unions of partition cells; with --eps-sq, the least good level.
    Approximate(ApproximateArgs),
    /// Witness constructions.
    Witness(WitnessArgs),
    /// eps-net of a compact atomic model, with its cover check.
    Net(NetArgs),
    /// Brute-force cross-checks.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
}

#[derive(Args)]
struct ApproximateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    eps_sq: Option<String>,
    /// Search depth for --eps-sq (default: NBA_LAB_NMAX, else 24).
    #[arg(long)]
    n_max: Option<u32>,
    /// Use the standard partition of this level.
    #[arg(long, conflicts_with_all = ["eps_sq", "partition"])]
    level: Option<u32>,
    /// Use this partition file.
    #[arg(long, conflicts_with = "eps_sq")]
    partition: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Tm,
    TmEps,
    Alpha,
    Discrete,
    Net,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long, value_enum)]
    kind: WitnessKind,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    eps_sq: Option<String>,
    /// Defaults to Lebesgue measure on [0,1)^2 for tm, tm-eps and alpha.
    #[arg(long)]
    model: Option<PathBuf>,
    /// alpha: partition file (default: standard partition of level --m).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// discrete: family size.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 256)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct NetArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    eps_sq: String,
    #[arg(long, default_value_t = 256)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum OracleOp {
    /// Inner/outer Jordan content on the level-L dyadic grid.
    Jordan {
        #[arg(long)]
        region: PathBuf,
        #[arg(long)]
        level: u32,
    },
    /// Minimum over all unions of partition cells (at most 16 cells).
    Exhaustive {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        set: PathBuf,
    },
    /// Enumerative cover check of an eps-net (built from the model when --net is absent).
    NetCheck {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        eps_sq: String,
        #[arg(long)]
        bound: usize,
        /// JSON array of atom sets.
        #[arg(long)]
        net: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = if e.is_refusal() {
            (3, "refused")
        } else {
            match e {
                Error::Inconsistent(_) | Error::Overflow(_) => (1, "internal"),
                _ => (2, "invalid_input"),
            }
        };
        Failure { code, kind, message: e.to_string() }
    }
}

fn invalid(message: String) -> Failure {
    Failure { code: 2, kind: "invalid_input", message }
}

type Run<T> = std::result::Result<T, Failure>;

/// Inputs read so far, hashed into the envelope's digest.
#[derive(Default)]
struct Inputs {
    entries: Vec<(String, String)>,
}

impl Inputs {
    fn file(&mut self, name: &str, path: &Path) -> Run<String> {
        let text =
            fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        self.entries.push((name.to_string(), text.clone()));
        Ok(text)
    }

    fn scalar(&mut self, name: &str, value: impl ToString) {
        self.entries.push((name.to_string(), value.to_string()));
    }

    fn rational(&mut self, name: &str, s: &str) -> Run<Q> {
        self.scalar(name, s);
        Ok(parse_q(s)?)
    }

    fn model(&mut self, path: &Path) -> Run<MeasureModel> {
        let text = self.file("model", path)?;
        Ok(json::from_str::<ModelJson>(&text)?.decode()?)
    }

    fn set(&mut self, name: &str, path: &Path, model: &MeasureModel) -> Run<Set> {
        let text = self.file(name, path)?;
        Ok(json::from_str::<SetJson>(&text)?.decode(model)?)
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (name, value) in &self.entries {
            h.update((name.len() as u64).to_le_bytes());
            h.update(name.as_bytes());
            h.update((value.len() as u64).to_le_bytes());
            h.update(value.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn unit_square() -> MeasureModel {
    MeasureModel::lebesgue(2, Some(AxisBox::unit(2))).expect("unit square is a valid window")
}

fn write_svg(path: &Path, frame: &AxisBox, layers: &[(&Region, &str)], grid: Option<u32>) -> Run<()> {
    let text = svg::render(frame, layers, grid)?;
    fs::write(path, text).map_err(|e| Failure {
        code: 1,
        kind: "io",
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn svg_frame(model: &MeasureModel, regions: &[&Region]) -> Option<AxisBox> {
    let l = model.continuous()?;
    if l.dim != 2 {
        return None;
    }
    if let Some(w) = &l.window {
        return Some(w.clone());
    }
    let mut frame: Option<AxisBox> = None;
    for r in regions {
        if let Some(b) = r.bbox() {
            frame = Some(match frame {
                None => b,
                Some(f) => {
                    let iv = f
                        .intervals()
                        .zip(b.intervals())
                        .map(|((a, c), (x, y))| (a.min(x).clone(), c.max(y).clone()))
                        .collect();
                    AxisBox::new(iv).ok()?
                }
            });
        }
    }
    frame
}

fn required<T>(value: Option<T>, flag: &str) -> Run<T> {
    value.ok_or_else(|| invalid(format!("--{flag} is required here")))
}

fn dispatch(cmd: &Command, inputs: &mut Inputs) -> Run<Value> {
    match cmd {
        Command::Classify { model } => {
            let m = inputs.model(model)?;
            let (all, fin) = classify::classify(&m);
            Ok(json!({
                "verdicts": [json::verdict(&all), json::verdict(&fin)],
                "report": classify::justify(&all) + &classify::justify(&fin),
            }))
        }
        Command::Distance { model, a, b } => {
            let m = inputs.model(model)?;
            let sa = inputs.set("a", a, &m)?;
            let sb = inputs.set("b", b, &m)?;
            Ok(json::dist_value(&metric::dist_sq(&m, &sa, &sb)?))
        }
        Command::Approximate(args) => approximate(args, inputs),
        Command::Witness(args) => witness_cmd(args, inputs),
        Command::Net(args) => {
            let m = inputs.model(&args.model)?;
            let eps = inputs.rational("eps_sq", &args.eps_sq)?;
            inputs.scalar("trials", args.trials);
            inputs.scalar("seed", args.seed);
            net_payload(&m, &eps, args.trials, args.seed)
        }
        Command::Oracle { op } => oracle_cmd(op, inputs),
    }
}

fn net_payload(m: &MeasureModel, eps: &Q, trials: u64, seed: u64) -> Run<Value> {
    let net = witness::build_net(m, eps)?;
    let check = witness::verify_net(m, &net, trials, seed)?;
    Ok(json!({"net": json::eps_net(&net, m), "check": json::net_check(&check, m)}))
}

fn approximate(args: &ApproximateArgs, inputs: &mut Inputs) -> Run<Value> {
    let m = inputs.model(&args.model)?;
    let b = inputs.set("set", &args.set, &m)?;
    let (payload, approximant, level) = if let Some(eps) = &args.eps_sq {
        let eps = inputs.rational("eps_sq", eps)?;
        let n_max = args.n_max.unwrap_or_else(default_n_max);
        inputs.scalar("n_max", n_max);
        let report = find_level(&m, &b, &eps, n_max)?;
        (json::approx_report(&report, &m), report.approximant.clone(), Some(report.level))
    } else {
        let partition = match (&args.partition, args.level) {
            (Some(p), _) => {
                let text = inputs.file("partition", p)?;
                json::from_str::<PartitionJson>(&text)?.decode(&m)?
            }
            (None, Some(l)) => {
                inputs.scalar("level", l);
                standard_filtration(&m, l)?
            }
            (None, None) => return Err(invalid("give --eps-sq, --level or --partition".into())),
        };
        let a = best_approximation(&m, &partition, &b)?;
        (json::approximation(&a, &m), a.approximant.clone(), partition.level())
    };
    if let Some(path) = &args.svg {
        let (target, approx) = (b.region().cloned(), approximant.region().cloned());
        let regions: Vec<&Region> = target.iter().chain(approx.iter()).collect();
        let frame =
            svg_frame(&m, &regions).ok_or_else(|| invalid("--svg needs a planar continuous part".into()))?;
        let mut layers = Vec::new();
        if let Some(a) = &approx {
            layers.push((a, "#f2c14e"));
        }
        if let Some(t) = &target {
            layers.push((t, "#3366cc99"));
        }
        write_svg(path, &frame, &layers, level.filter(|l| *l <= 8))?;
    }
    Ok(payload)
}

fn witness_cmd(args: &WitnessArgs, inputs: &mut Inputs) -> Run<Value> {
    let model = match &args.model {
        Some(p) => Some(inputs.model(p)?),
        None => None,
    };
    let eps = match &args.eps_sq {
        Some(s) => Some(inputs.rational("eps_sq", s)?),
        None => None,
    };
    if let Some(m) = args.m {
        inputs.scalar("m", m);
    }
    match args.kind {
        WitnessKind::Tm => {
            let m = required(args.m, "m")?;
            let t = witness::make_tm(m)?;
            if let Some(p) = &args.svg {
                write_svg(p, &AxisBox::unit(2), &[(&t, "#3366cc")], Some(m))?;
            }
            Ok(json!({"kind": "tm", "m": m, "region": json::region(&t), "measure": t.measure().to_string()}))
        }
        WitnessKind::TmEps => {
            let m = required(args.m, "m")?;
            let eps = required(eps, "eps-sq")?;
            let model = model.unwrap_or_else(unit_square);
            let r = witness::verify_cell_witness(&model, m, &eps)?;
            if let Some(p) = &args.svg {
                write_svg(p, &AxisBox::unit(2), &[(&r.witness, "#cc3333")], Some(m))?;
            }
            Ok(json::witness_report(&r, &model))
        }
        WitnessKind::Alpha => {
            let eps = required(eps, "eps-sq")?;
            let model = model.unwrap_or_else(unit_square);
            let partition = match (&args.partition, args.m) {
                (Some(p), _) => {
                    let text = inputs.file("partition", p)?;
                    json::from_str::<PartitionJson>(&text)?.decode(&model)?
                }
                (None, Some(m)) => standard_filtration(&model, m)?,
                (None, None) => return Err(invalid("alpha needs --partition or --m".into())),
            };
            let w = witness::make_alpha_witness(&model, &partition, &eps)?;
            if let (Some(p), Some(r)) = (&args.svg, w.set.region()) {
                let frame = svg_frame(&model, &[r])
                    .ok_or_else(|| invalid("--svg needs a planar continuous part".into()))?;
                write_svg(p, &frame, &[(r, "#cc3333")], partition.level().filter(|l| *l <= 8))?;
            }
            Ok(json::alpha_witness(&w, &model))
        }
        WitnessKind::Discrete => {
            let model = required(model, "model")?;
            let k = required(args.k, "k")?;
            inputs.scalar("k", k);
            Ok(json::discrete_family(&witness::discrete_family(&model, k)?, &model))
        }
        WitnessKind::Net => {
            let model = required(model, "model")?;
            let eps = required(eps, "eps-sq")?;
            inputs.scalar("trials", args.trials);
            inputs.scalar("seed", args.seed);
            net_payload(&model, &eps, args.trials, args.seed)
        }
    }
}

fn oracle_cmd(op: &OracleOp, inputs: &mut Inputs) -> Run<Value> {
    match op {
        OracleOp::Jordan { region, level } => {
            let text = inputs.file("region", region)?;
            inputs.scalar("level", level);
            let r = json::from_str::<RegionJson>(&text)?.decode()?;
            let b = oracle::jordan_bounds(&r, *level)?;
            Ok(json::jordan(&b, &r.measure()))
        }
        OracleOp::Exhaustive { model, partition, set } => {
            let m = inputs.model(model)?;
            let text = inputs.file("partition", partition)?;
            let p = json::from_str::<PartitionJson>(&text)?.decode(&m)?;
            let b = inputs.set("set", set, &m)?;
            let ex = oracle::exhaustive_best_approx(&m, &p, &b)?;
            let best = best_approximation(&m, &p, &b)?;
            let mut v = json::exhaustive(&ex);
            v["majority_rule_error"] = json!(json::ext_str(&best.error));
            v["agrees"] = json!(best.error == ex.error);
            Ok(v)
        }
        OracleOp::NetCheck { model, eps_sq, bound, net } => {
            let m = inputs.model(model)?;
            let eps = inputs.rational("eps_sq", eps_sq)?;
            inputs.scalar("bound", bound);
            let u = m.atoms().cloned().ok_or_else(|| invalid("net checks need an atomic model".into()))?;
            let elements = match net {
                Some(p) => {
                    let text = inputs.file("net", p)?;
                    json::from_str::<Vec<json::AtomSetJson>>(&text)?
                        .iter()
                        .map(|a| a.decode(&u))
                        .collect::<Result<Vec<_>, _>>()?
                }
                None => witness::build_net(&m, &eps)?.elements,
            };
            let covered = oracle::exhaustive_net_check(&m, &elements, &eps, *bound)?;
            Ok(json!({"covered": covered, "net_size": elements.len(), "bound": bound}))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let mut inputs = Inputs::default();
    let result = dispatch(&cli.command, &mut inputs);
    let (status, body_key, body) = match result {
        Ok(payload) => (0u8, "payload", payload),
        Err(f) => {
            eprintln!("nba-lab: {}", f.message);
            (f.code, "error", json!({"kind": f.kind, "message": f.message}))
        }
    };
    let mut envelope = json!({
        "command": argv,
        "inputs_digest": inputs.digest(),
        "status": status,
    });
    envelope[body_key] = body;
    let text = json::canonical(&envelope);
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("nba-lab: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(status)
}
