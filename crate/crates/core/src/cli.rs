//! Command-line interface: family construction, evaluation tables, QES
//! solving, SUSY partner reports and spectrum verification, emitted as
//! deterministic CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or spec error.

use crate::families::{make_family, Family, FamilySpec};
use crate::numerics::{default_grid, verify_spectrum_seeded, Grid};
use crate::pct_core::AmbiguityParams;
use crate::qes_solver::qes_solve;
use crate::susy::{partner, partner_veff_closed, PartnerKind};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "pdem-spectra",
    about = "Solvable spectra for the 1D position-dependent-mass Schrodinger equation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the family catalog and its parameter restrictions
    List(ListArgs),
    /// Tabulate x, M(x), V_eff(x), V(x; alpha, beta) and wavefunctions
    Eval(EvalArgs),
    /// Closed-form spectrum table
    Spectrum(SpectrumArgs),
    /// Solve the QES polynomial equation: constants c_n and coefficients
    Qes(QesArgs),
    /// SUSY partner report: partner potential table and mapped levels
    Partner(PartnerArgs),
    /// Verify closed-form spectra against the finite-difference eigensolver
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted); written atomically
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Artifact format
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Family selection; flags mirror the JSON field names. A JSON file given
/// via --spec wins over flags, with a warning on conflict.
#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Family kind: jacobi_es | laguerre_es | qes
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    /// JSON file holding a FamilySpec
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

impl FamilyArgs {
    pub fn resolve(&self) -> Result<FamilySpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)?;
            let spec: FamilySpec = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad spec file {}: {e}", path.display())))?;
            self.warn_on_conflict(&spec);
            return Ok(spec);
        }
        let kind = self
            .family
            .as_deref()
            .ok_or_else(|| Error::Config("--family (or --spec) is required".into()))?;
        let q = self
            .q
            .ok_or_else(|| Error::Config("--q is required".into()))?;
        let a = self
            .a
            .ok_or_else(|| Error::Config("--a is required".into()))?;
        let mut spec = match kind {
            "jacobi_es" => FamilySpec::jacobi(
                q,
                a,
                self.b
                    .ok_or_else(|| Error::Config("jacobi_es requires --b".into()))?,
            ),
            "laguerre_es" => FamilySpec::laguerre(q, a),
            "qes" => FamilySpec::qes(
                q,
                a,
                self.xi
                    .ok_or_else(|| Error::Config("qes requires --xi".into()))?,
                self.k
                    .ok_or_else(|| Error::Config("qes requires --k".into()))?,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown family '{other}' (expected jacobi_es, laguerre_es or qes)"
                )))
            }
        };
        if kind != "jacobi_es" && self.b.is_some() {
            return Err(Error::Config("--b applies only to jacobi_es".into()));
        }
        if kind != "qes" && (self.xi.is_some() || self.k.is_some()) {
            return Err(Error::Config("--xi/--k apply only to qes".into()));
        }
        spec.v0 = self.v0.unwrap_or(0.0);
        Ok(spec)
    }

    fn warn_on_conflict(&self, spec: &FamilySpec) {
        let mut conflicts = Vec::new();
        if let Some(q) = self.q {
            if q != spec.q {
                conflicts.push("--q");
            }
        }
        if let Some(a) = self.a {
            if a != spec.a {
                conflicts.push("--a");
            }
        }
        if self.b.is_some() && self.b != spec.b {
            conflicts.push("--b");
        }
        if self.xi.is_some() && self.xi != spec.xi {
            conflicts.push("--xi");
        }
        if self.k.is_some() && self.k != spec.k {
            conflicts.push("--k");
        }
        if let Some(v0) = self.v0 {
            if v0 != spec.v0 {
                conflicts.push("--v0");
            }
        }
        if !conflicts.is_empty() {
            eprintln!(
                "warning: --spec wins over conflicting flags: {}",
                conflicts.join(", ")
            );
        }
    }
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Ordering parameter alpha (default: BenDaniel-Duke)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Ordering parameter beta (default: BenDaniel-Duke)
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Number of wavefunction columns psi0..psi{levels-1}
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
}

#[derive(Debug, Args)]
pub struct QesArgs {
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub k: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub xi: f64,
}

#[derive(Debug, Args)]
pub struct PartnerArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Require the closed-form column (errors for QES k >= 3, which has none)
    #[arg(long)]
    pub closed_form: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

/// 17 significant digits, locale-independent.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_artifact(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            {
                let mut f = std::fs::File::create(&tmp)?;
                f.write_all(content.as_bytes())?;
                f.sync_all()?;
            }
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}

fn run_list(args: &ListArgs) -> Result<i32> {
    #[derive(Serialize)]
    struct Entry {
        family: &'static str,
        mass: &'static str,
        parameters: &'static str,
        restrictions: &'static str,
        levels: &'static str,
    }
    let entries = [
        Entry {
            family: "jacobi_es",
            mass: "sech^2(qx)",
            parameters: "q, a, b, v0",
            restrictions: "q > 0, a > -1/2, b > -1/2",
            levels: "infinite ladder",
        },
        Entry {
            family: "laguerre_es",
            mass: "exp(-qx)",
            parameters: "q, a, v0",
            restrictions: "q > 0, a > -1/2",
            levels: "infinite ladder",
        },
        Entry {
            family: "qes",
            mass: "exp(-qx)",
            parameters: "q, a, xi, k, v0",
            restrictions: "q > 0, xi > 0, k >= 1, a < -2k + 3/2",
            levels: "k + 1 closed-form levels",
        },
    ];
    let content = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&entries)? + "\n",
        Format::Csv => {
            let mut s = String::from("family,mass,parameters,restrictions,levels\n");
            for e in &entries {
                s.push_str(&format!(
                    "{},{},\"{}\",\"{}\",{}\n",
                    e.family, e.mass, e.parameters, e.restrictions, e.levels
                ));
            }
            s
        }
    };
    write_artifact(args.output.output.as_deref(), &content)?;
    Ok(0)
}

fn run_eval(args: &EvalArgs) -> Result<i32> {
    let spec = args.family.resolve()?;
    let family = make_family(spec.clone())?;
    let amb = AmbiguityParams::new(args.alpha, args.beta);
    if args.points < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let levels: Vec<_> = (0..args.levels)
        .map(|n| family.level(n))
        .collect::<Result<_>>()?;
    let mass = family.mass_profile();

    #[derive(Serialize)]
    struct Row {
        x: f64,
        mass: f64,
        veff: f64,
        v: f64,
        psi: Vec<f64>,
    }
    let mut rows = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let x = args.x_min + (args.x_max - args.x_min) * i as f64 / (args.points as f64 - 1.0);
        rows.push(Row {
            x,
            mass: mass.value_at(x),
            veff: family.veff_at(x),
            v: family.initial_potential_at(&amb, x),
            psi: levels.iter().map(|l| l.psi_at(x) / l.norm).collect(),
        });
    }

    let content = match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Artifact {
                spec: FamilySpec,
                alpha: f64,
                beta: f64,
                rows: Vec<Row>,
            }
            serde_json::to_string_pretty(&Artifact {
                spec,
                alpha: args.alpha,
                beta: args.beta,
                rows,
            })? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("x,mass,veff,v");
            for n in 0..args.levels {
                s.push_str(&format!(",psi{n}"));
            }
            s.push('\n');
            for r in rows {
                s.push_str(&fmt_f64(r.x));
                for v in [r.mass, r.veff, r.v] {
                    s.push(',');
                    s.push_str(&fmt_f64(v));
                }
                for p in r.psi {
                    s.push(',');
                    s.push_str(&fmt_f64(p));
                }
                s.push('\n');
            }
            s
        }
    };
    write_artifact(args.output.output.as_deref(), &content)?;
    Ok(0)
}

fn run_spectrum(args: &SpectrumArgs) -> Result<i32> {
    let spec = args.family.resolve()?;
    let family = make_family(spec.clone())?;
    let mut levels = Vec::with_capacity(args.levels);
    for n in 0..args.levels {
        levels.push((n, family.energy(n)?));
    }
    let content = match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Level {
                n: usize,
                energy: f64,
            }
            #[derive(Serialize)]
            struct Artifact {
                spec: FamilySpec,
                levels: Vec<Level>,
            }
            serde_json::to_string_pretty(&Artifact {
                spec,
                levels: levels
                    .into_iter()
                    .map(|(n, energy)| Level { n, energy })
                    .collect(),
            })? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("n,energy\n");
            for (n, e) in levels {
                s.push_str(&format!("{n},{}\n", fmt_f64(e)));
            }
            s
        }
    };
    write_artifact(args.output.output.as_deref(), &content)?;
    Ok(0)
}

fn run_qes(args: &QesArgs) -> Result<i32> {
    let sol = qes_solve(args.k, args.a, args.xi)?;
    let content = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&sol)? + "\n",
        Format::Csv => {
            let mut s = String::from("n,c");
            for j in 0..=args.k {
                s.push_str(&format!(",coeff{j}"));
            }
            s.push('\n');
            for (n, level) in sol.levels.iter().enumerate() {
                s.push_str(&format!("{n},{}", fmt_f64(level.c)));
                for c in &level.coeffs {
                    s.push(',');
                    s.push_str(&fmt_f64(*c));
                }
                s.push('\n');
            }
            s
        }
    };
    write_artifact(args.output.output.as_deref(), &content)?;
    Ok(0)
}

fn run_partner(args: &PartnerArgs) -> Result<i32> {
    let spec = args.family.resolve()?;
    let family = make_family(spec.clone())?;
    let report = partner(&family);
    if args.closed_form && report.kind == PartnerKind::GenericNumeric {
        return Err(Error::NoClosedForm {
            k: spec.k.unwrap_or(0),
        });
    }
    if args.points < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let has_closed = report.kind != PartnerKind::GenericNumeric;
    let mut table = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let x = args.x_min + (args.x_max - args.x_min) * i as f64 / (args.points as f64 - 1.0);
        let generic = report.veff1_at(x);
        let closed = if has_closed {
            Some(partner_veff_closed(&family, x)?)
        } else {
            None
        };
        table.push((x, generic, closed));
    }

    let content = match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct TableRow {
                x: f64,
                veff1_generic: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                veff1_closed: Option<f64>,
            }
            #[derive(Serialize)]
            struct KnownLevel {
                n: usize,
                energy: f64,
            }
            #[derive(Serialize)]
            struct Artifact {
                source: FamilySpec,
                partner_kind: PartnerKind,
                epsilon: f64,
                known_levels: Vec<KnownLevel>,
                #[serde(skip_serializing_if = "Option::is_none")]
                shifted: Option<FamilySpec>,
                table: Vec<TableRow>,
            }
            serde_json::to_string_pretty(&Artifact {
                source: spec,
                partner_kind: report.kind,
                epsilon: report.intertwiner().epsilon(),
                known_levels: report
                    .known_levels
                    .iter()
                    .map(|&(n, energy)| KnownLevel { n, energy })
                    .collect(),
                shifted: report.shifted.clone(),
                table: table
                    .into_iter()
                    .map(|(x, g, c)| TableRow {
                        x,
                        veff1_generic: g,
                        veff1_closed: c,
                    })
                    .collect(),
            })? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("x,veff1_generic,veff1_closed\n");
            for (x, g, c) in table {
                s.push_str(&fmt_f64(x));
                s.push(',');
                s.push_str(&fmt_f64(g));
                s.push(',');
                if let Some(c) = c {
                    s.push_str(&fmt_f64(c));
                }
                s.push('\n');
            }
            s
        }
    };
    write_artifact(args.output.output.as_deref(), &content)?;
    Ok(0)
}

fn seed_from_env() -> u64 {
    std::env::var("PDEM_SPECTRA_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn run_verify(args: &VerifyArgs) -> Result<i32> {
    let spec = args.family.resolve()?;
    // An inadmissible family cannot verify: report the restriction and
    // exit with the verification-failure code.
    let family: Family = match make_family(spec) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("verification failed: {e}");
            return Ok(1);
        }
    };
    let base = default_grid(&family);
    let grid = Grid::new(
        args.x_min.unwrap_or(base.x_min),
        args.x_max.unwrap_or(base.x_max),
        args.points.unwrap_or(base.n_points),
    )?;
    let report = verify_spectrum_seeded(&family, args.levels, &grid, seed_from_env())?;

    let content = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => {
            let mut s = String::from("n,analytic,numeric,rel_err,nodes,boundary_ok\n");
            for n in 0..report.analytic.len() {
                s.push_str(&format!(
                    "{n},{},{},{},{},{}\n",
                    fmt_f64(report.analytic[n]),
                    fmt_f64(report.numeric[n]),
                    fmt_f64(report.rel_err[n]),
                    report.node_counts[n],
                    report.boundary_ok[n]
                ));
            }
            s
        }
    };
    write_artifact(args.output.output.as_deref(), &content)?;

    let ok = report.level_ok();
    if let Some(first_bad) = ok.iter().position(|&p| !p) {
        eprintln!(
            "verification failed at level {first_bad}: analytic {}, numeric {}, rel_err {}, nodes {}, boundary_ok {}",
            report.analytic[first_bad],
            report.numeric[first_bad],
            report.rel_err[first_bad],
            report.node_counts[first_bad],
            report.boundary_ok[first_bad]
        );
        return Ok(1);
    }
    Ok(0)
}

/// Execute a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::List(args) => run_list(args),
        Command::Eval(args) => run_eval(args),
        Command::Spectrum(args) => run_spectrum(args),
        Command::Qes(args) => run_qes(args),
        Command::Partner(args) => run_partner(args),
        Command::Verify(args) => run_verify(args),
    }
}
