//! `qirw`: batch driver for weight synthesis.
//!
//! Exit codes: 0 success, 1 input error, 2 certification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qirw_core::extension::{SynthesisReport, Verdict};
use qirw_core::io::{DecompositionDoc, GraphDoc, VertexMapDoc, WeightingDoc};
use qirw_core::qi::QiFrame;
use qirw_core::{synthesize, EdgeWeighting, Error, PathDecomposition, Profile, QiParams};
use qirw_lab::generate::{gen_bounded_pw, gen_comb, gen_pathlike, Generator};
use qirw_lab::oracle::{all_pairs, certify};
use qirw_lab::{Instance, Provenance};

#[derive(Parser)]
#[command(name = "qirw", version, about = "Reweight a target graph so a quasi-isometry becomes additive")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a weighting and write the report.
    Synthesize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = ProfileArg::Checked)]
        profile: ProfileArg,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Recheck a report with the independent oracle.
    Certify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        report: PathBuf,
        /// With `--format csv`, where to write the per-pair distortion table.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Write a generated instance.
    Generate {
        /// One of pathlike, bounded_pw, comb.
        generator: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Parts each edge is subdivided into (pathlike).
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// Matching density for contraction (pathlike).
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        /// Width bound (bounded_pw).
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Depth (comb).
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the measured parameters of the map.
    Measure {
        #[command(flatten)]
        input: InputArgs,
        /// Weighting of the target, as a weighting document.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Also check the map at these parameters, given as `L,C`.
        #[arg(long, value_parser = parse_params)]
        params: Option<QiParams>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Instance document holding all four parts; overrides the others.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    g: Option<PathBuf>,
    #[arg(long)]
    h: Option<PathBuf>,
    #[arg(long)]
    bags: Option<PathBuf>,
    #[arg(long)]
    phi: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Checked,
    Fast,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

fn parse_params(s: &str) -> Result<QiParams, String> {
    let (l, c) = s.split_once(',').ok_or("expected L,C")?;
    let num = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(QiParams::new(num(l)?, num(c)?))
}

/// Result of a run that got past input parsing.
enum Outcome {
    Pass,
    Fail,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{}: malformed JSON", path.display()))
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a Path> {
    p.as_deref().ok_or_else(|| anyhow!("missing --{flag} (or --instance)"))
}

fn load_instance(a: &InputArgs, with_bags: bool) -> anyhow::Result<Instance> {
    if let Some(path) = &a.instance {
        return Instance::from_json(&read(path)?).with_context(|| format!("{}: bad instance", path.display()));
    }
    let g: GraphDoc = parse(need(&a.g, "g")?)?;
    let h: GraphDoc = parse(need(&a.h, "h")?)?;
    let phi: VertexMapDoc = parse(need(&a.phi, "phi")?)?;
    let d = if with_bags {
        parse::<DecompositionDoc>(need(&a.bags, "bags")?)?.to_decomposition()
    } else {
        PathDecomposition::new(vec![])
    };
    Ok(Instance {
        g: g.to_graph()?,
        h: h.to_graph()?,
        d,
        phi: phi.to_map(),
        provenance: Provenance::external("files"),
    })
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_synthesize(input: &InputArgs, profile: ProfileArg, out: Option<&Path>, format: Format) -> anyhow::Result<Outcome> {
    let inst = load_instance(input, true)?;
    let profile = match profile {
        ProfileArg::Checked => Profile::Checked,
        ProfileArg::Fast => Profile::Fast,
    };
    let report = match synthesize(&inst.g, &inst.h, &inst.d, &inst.phi, profile) {
        Ok(r) => r,
        Err(e @ Error::Assertion { .. }) => {
            eprintln!("qirw: {e}");
            return Ok(Outcome::Fail);
        }
        Err(e) => return Err(e.into()),
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Dot => inst.h.to_dot(Some(&report.weighting(&inst.h)?)),
        Format::Csv => bail!("synthesize writes json or dot"),
    };
    emit(out, &text)?;
    Ok(match report.verdict {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
    })
}

fn distortion_csv(inst: &Instance, w: &EdgeWeighting) -> String {
    let dg = all_pairs(&inst.g, |_, _| 1);
    let dh = all_pairs(&inst.h, |u, v| w.weight(&inst.h, u, v).unwrap_or(0));
    let hpos = |y| inst.h.idx(y).expect("image in the target");
    let mut s = String::from("u,v,dist_g,dist_h,difference\n");
    let cell = |d: Option<u64>| d.map_or("inf".to_string(), |x| x.to_string());
    for (i, &u) in inst.g.vertices().iter().enumerate() {
        for (j, &v) in inst.g.vertices().iter().enumerate().skip(i + 1) {
            let (a, b) = (dg[i][j], dh[hpos(inst.phi.get(u).unwrap())][hpos(inst.phi.get(v).unwrap())]);
            let diff = match (a, b) {
                (Some(a), Some(b)) => a.abs_diff(b).to_string(),
                _ => String::new(),
            };
            let _ = writeln!(s, "{u},{v},{},{},{diff}", cell(a), cell(b));
        }
    }
    s
}

fn run_certify(input: &InputArgs, report: &Path, out: Option<&Path>, format: Format) -> anyhow::Result<Outcome> {
    let inst = load_instance(input, false)?;
    let report: SynthesisReport = parse(report)?;
    let cert = certify(&inst, &report);
    println!("{}", serde_json::to_string(&cert)?);
    match format {
        Format::Json => {}
        Format::Csv => {
            if cert.size.is_some() {
                let w = report.weighting(&inst.h)?;
                emit(out, &distortion_csv(&inst, &w))?;
            }
        }
        Format::Dot => bail!("certify writes json or csv"),
    }
    Ok(match cert.verdict {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
    })
}

fn run_measure(input: &InputArgs, weights: Option<&Path>, params: Option<QiParams>) -> anyhow::Result<Outcome> {
    let inst = load_instance(input, false)?;
    let w = weights
        .map(|p| parse::<WeightingDoc>(p)?.to_weighting(&inst.h).map_err(anyhow::Error::from))
        .transpose()?;
    let frame = QiFrame::new(&inst.g, &inst.h, w.as_ref(), &inst.phi)?;
    let c = frame.measure();
    let mut doc = serde_json::json!({
        "c": c,
        "params": c.map(|c| QiParams::normalized(c).to_string()),
        "minimal_additive": frame.minimal_additive(),
    });
    if let Some(p) = params {
        doc["check"] = serde_json::json!({
            "params": p.to_string(),
            "ok": frame.check(p).is_ok(),
            "witness": frame.check(p).err().map(|v| v.to_string()),
        });
    }
    println!("{doc}");
    Ok(Outcome::Pass)
}

#[allow(clippy::too_many_arguments)]
fn run_generate(name: &str, seed: u64, n: usize, p: u32, q: f64, k: usize, m: usize, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let inst = match name.parse::<Generator>()? {
        Generator::Pathlike => gen_pathlike(seed, n, p, q)?,
        Generator::BoundedPw => gen_bounded_pw(seed, n, k)?,
        Generator::Comb => gen_comb(m)?,
    };
    emit(out, &(inst.to_json()? + "\n"))?;
    Ok(Outcome::Pass)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("QIRW_THREADS") {
        let n: usize = v.parse().with_context(|| format!("QIRW_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Synthesize { input, profile, out, format } => run_synthesize(input, *profile, out.as_deref(), *format),
        Command::Certify { input, report, out, format } => run_certify(input, report, out.as_deref(), *format),
        Command::Generate { generator, seed, n, p, q, k, m, out } => {
            run_generate(generator, *seed, *n, *p, *q, *k, *m, out.as_deref())
        }
        Command::Measure { input, weights, params } => run_measure(input, weights.as_deref(), *params),
    });
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("qirw: {e:#}");
            ExitCode::from(1)
        }
    }
}
