//! Command-line front end. Every command reads and writes versioned JSON
//! documents (see [`json`]) and maps failures to exit codes: 0 success,
//! 1 input error, 2 failed mathematical check, 3 not comparable.

pub mod json;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::boundary::BranchedFunction;
use crate::error::{Error, Result};
use crate::gluing::{disjoint_union, glue_with_report, GluePair};
use crate::lattice_cft::{
    attach_b, cft_dimension, cocycle, discriminant, discriminant_representatives, theta_rank, EvenLattice, Label,
    LatticeBranchedMap,
};
use crate::linalg::C;
use crate::oav::{equivalent, equivalent_aligned, OpenAbelianVariety};
use crate::torelli::{make_circle_domain, torelli};
use json::{Envelope, Kind};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "openjac", version, about = "Open abelian varieties of circle domains, gluing and lattice data")]
pub struct Cli {
    /// Fourier truncation level.
    #[arg(long, global = true, default_value_t = 16)]
    pub truncation: usize,
    /// Numerical tolerance for checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the variety of a circle domain.
    Torelli { domain: PathBuf },
    /// Glue inbound/outbound boundary pairs, given as `IN:OUT`.
    Glue {
        oav: PathBuf,
        #[arg(long = "pair", required = true)]
        pairs: Vec<String>,
    },
    /// Disjoint union of several varieties.
    Union {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
    },
    Validate { file: PathBuf },
    /// Period matrix of a closed variety.
    Period { file: PathBuf },
    /// Equivalence of two presentations.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        /// Transport the second presentation onto the first before comparing.
        #[arg(long)]
        align: bool,
    },
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
}

#[derive(Debug, Args)]
pub struct LatticeArg {
    /// Lattice document.
    #[arg(long, conflicts_with = "name")]
    pub lattice: Option<PathBuf>,
    /// Built-in lattice: a1, a2 or e8.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum LatticeCommand {
    /// Rank of the genus-1 theta functions of `L′/L`.
    ThetaRank {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Modular parameter as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    Discriminant {
        #[command(flatten)]
        lattice: LatticeArg,
    },
    /// Cocycle identity on random triples of lattice-valued maps.
    CocycleCheck {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, default_value_t = 50)]
        triples: usize,
    },
    /// Dimension of the genus-g conformal block with boundary labels.
    CftDim {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long)]
        genus: u32,
        /// Label `x1,x2,…:ε` with rational coordinates in the lattice basis.
        #[arg(long = "label", allow_hyphen_values = true)]
        labels: Vec<String>,
    },
}

/// Outcome of a command: the document to emit and the exit code.
pub struct Outcome {
    pub document: Envelope,
    pub code: i32,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Radical(_) | Error::Validation(_) => 2,
        Error::NotComparable(_) => 3,
        _ => 1,
    }
}

pub fn seed_from_env() -> u64 {
    std::env::var("OPENJAC_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Runs a parsed command line, writes its document and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(out) => match emit(cli, &out.document) {
            Ok(()) => out.code,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(cli: &Cli, doc: &Envelope) -> Result<()> {
    let text = match cli.format {
        Format::Json => doc.to_canonical(),
        Format::Text => format!("kind: {:?}\n{}", doc.kind, json::render_text(&doc.payload)),
    };
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_oav(path: &Path) -> Result<OpenAbelianVariety> {
    json::oav_from_value(&json::parse_payload(&read(path)?, Kind::Oav)?)
}

fn load_lattice(arg: &LatticeArg) -> Result<EvenLattice> {
    match (&arg.lattice, arg.name.as_deref()) {
        (Some(path), _) => json::lattice_from_value(&json::parse_payload(&read(path)?, Kind::Lattice)?),
        (None, Some(name)) => match name.to_ascii_lowercase().as_str() {
            "a1" => Ok(EvenLattice::a1()),
            "a2" => Ok(EvenLattice::a2()),
            "e8" => Ok(EvenLattice::e8()),
            other => Err(Error::Input(format!("unknown lattice {other:?}"))),
        },
        (None, None) => Err(Error::Input("give --lattice FILE or --name".into())),
    }
}

fn report(payload: Value, pass: bool) -> Outcome {
    Outcome { document: Envelope::new(Kind::Report, payload), code: if pass { 0 } else { 2 } }
}

fn oav_outcome(x: &OpenAbelianVariety, extra: Vec<(&str, Value)>, tol: f64) -> Result<Outcome> {
    let rep = x.validate_with(tol)?;
    let mut payload = json::oav_to_value(x);
    let obj = payload.as_object_mut().expect("object payload");
    obj.insert("validation".into(), serde_json::to_value(&rep).expect("report serializes"));
    for (k, v) in extra {
        obj.insert(k.into(), v);
    }
    Ok(Outcome { document: Envelope::new(Kind::Oav, payload), code: if rep.pass { 0 } else { 2 } })
}

fn parse_pair(s: &str) -> Result<GluePair> {
    let bad = || Error::Input(format!("glue pair {s:?} is not IN:OUT"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok(GluePair::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_number(s: &str) -> Result<f64> {
    let bad = || Error::Input(format!("{s:?} is not a number"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn parse_label(s: &str) -> Result<Label> {
    let (xs, eps) = s
        .rsplit_once(':')
        .ok_or_else(|| Error::Input(format!("label {s:?} is not x1,x2,…:ε")))?;
    let lambda = xs.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
    let epsilon = match eps.trim() {
        "1" | "+1" | "+" => 1,
        "-1" | "-" => -1,
        other => return Err(Error::Input(format!("label sign {other:?} must be ±1"))),
    };
    Ok(Label { lambda, epsilon })
}

fn parse_complex(s: &str) -> Result<C> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Input(format!("{s:?} is not re,im")))?;
    Ok(C::new(parse_number(a)?, parse_number(b)?))
}

/// A real lattice-valued map with integral degrees and low modes.
pub fn random_lattice_map(rng: &mut impl Rng, rank: usize, truncation: usize) -> LatticeBranchedMap {
    let modes = truncation.min(4);
    let comps = (0..rank)
        .map(|_| {
            let mut f = BranchedFunction::winding(C::new(rng.gen_range(-2..=2) as f64, 0.0), truncation);
            f.set_coeff(0, C::new(rng.gen_range(-1.0..1.0), 0.0));
            for n in 1..=modes as i64 {
                let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                f.set_coeff(n, z);
                f.set_coeff(-n, z.conj());
            }
            f
        })
        .collect();
    LatticeBranchedMap::new(comps).expect("equal truncations")
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let n = cli.truncation;
    match &cli.command {
        Command::Torelli { domain } => {
            let spec = json::domain_from_value(&json::parse_payload(&read(domain)?, Kind::CircleDomain)?)?;
            let dom = make_circle_domain(spec)?;
            let x = torelli(&dom, n)?;
            oav_outcome(&x, vec![("domain", json::domain_to_value(&dom.spec()))], cli.tol.unwrap_or(1e-10))
        }
        Command::Glue { oav, pairs } => {
            let x = load_oav(oav)?;
            let pairs = pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
            let (y, rep) = glue_with_report(&x, &pairs)?;
            let tol = cli.tol.unwrap_or(1e-8);
            let radical_ok = rep.radical_distance < tol;
            let mut out = oav_outcome(&y, vec![("glue_report", serde_json::to_value(&rep).expect("report"))], tol)?;
            if !radical_ok {
                out.code = 2;
            }
            Ok(out)
        }
        Command::Union { files } => {
            let mut acc = load_oav(&files[0])?;
            for f in &files[1..] {
                acc = disjoint_union(&acc, &load_oav(f)?)?;
            }
            oav_outcome(&acc, Vec::new(), cli.tol.unwrap_or(1e-10))
        }
        Command::Validate { file } => {
            let x = load_oav(file)?;
            let rep = x.validate_with(cli.tol.unwrap_or(1e-10))?;
            let pass = rep.pass;
            Ok(report(
                json!({
                    "genus": x.genus(),
                    "dim_u": x.dim_u(),
                    "dim_v": x.dim_v(),
                    "validation": serde_json::to_value(&rep).expect("report"),
                }),
                pass,
            ))
        }
        Command::Period { file } => {
            let x = load_oav(file)?;
            let tau = x.period_matrix()?;
            Ok(report(json!({ "genus": x.genus(), "tau": json::matrix_to_value(&tau) }), true))
        }
        Command::Equiv { first, second, align } => {
            let x1 = load_oav(first)?;
            let x2 = load_oav(second)?;
            let tol = cli.tol.unwrap_or(1e-8);
            let eq = if *align { equivalent_aligned(&x1, &x2, tol)? } else { equivalent(&x1, &x2, tol)? };
            Ok(report(json!({ "equivalent": eq, "aligned": align }), eq))
        }
        Command::Lattice { command } => lattice(command),
    }
}

fn lattice(cmd: &LatticeCommand) -> Result<Outcome> {
    match cmd {
        LatticeCommand::ThetaRank { lattice, tau, radius, samples } => {
            let l = load_lattice(lattice)?;
            let tau = parse_complex(tau)?;
            let d = discriminant(&l) as usize;
            let rep = theta_rank(&l, tau, *radius, samples.unwrap_or(d + 4), seed_from_env())?;
            let pass = rep.rank as u64 == rep.expected;
            Ok(report(
                json!({
                    "lattice": json::lattice_to_value(&l),
                    "tau": json::complex_to_value(tau),
                    "theta_rank": serde_json::to_value(&rep).expect("report"),
                    "pass": pass,
                }),
                pass,
            ))
        }
        LatticeCommand::Discriminant { lattice } => {
            let l = load_lattice(lattice)?;
            Ok(report(
                json!({
                    "lattice": json::lattice_to_value(&l),
                    "discriminant": discriminant(&l),
                    "representatives": discriminant_representatives(&l),
                }),
                true,
            ))
        }
        LatticeCommand::CocycleCheck { lattice, triples } => {
            let l = load_lattice(lattice)?;
            let b = attach_b(&l)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env());
            let mut max_identity = 0.0f64;
            let mut max_modulus = 0.0f64;
            for _ in 0..*triples {
                let f = random_lattice_map(&mut rng, l.rank(), 8);
                let g = random_lattice_map(&mut rng, l.rank(), 8);
                let h = random_lattice_map(&mut rng, l.rank(), 8);
                let lhs = cocycle(&l, &b, &f, &g)? * cocycle(&l, &b, &f.add(&g), &h)?;
                let rhs = cocycle(&l, &b, &g, &h)? * cocycle(&l, &b, &f, &g.add(&h))?;
                max_identity = max_identity.max((lhs - rhs).norm());
                max_modulus = max_modulus.max((cocycle(&l, &b, &f, &g)?.norm() - 1.0).abs());
            }
            let pass = max_identity < 1e-10 && max_modulus < 1e-10;
            Ok(report(
                json!({
                    "lattice": json::lattice_to_value(&l),
                    "triples": triples,
                    "max_identity_error": max_identity,
                    "max_modulus_error": max_modulus,
                    "pass": pass,
                }),
                pass,
            ))
        }
        LatticeCommand::CftDim { lattice, genus, labels } => {
            let l = load_lattice(lattice)?;
            let labels = labels.iter().map(|s| parse_label(s)).collect::<Result<Vec<_>>>()?;
            let dim = cft_dimension(&l, *genus, &labels)?;
            Ok(report(
                json!({
                    "lattice": json::lattice_to_value(&l),
                    "genus": genus,
                    "labels": serde_json::to_value(&labels).expect("labels"),
                    "dimension": dim,
                }),
                true,
            ))
        }
    }
}
