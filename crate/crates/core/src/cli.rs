//! Command-line front end. Exit status: 0 on success, 1 on usage, input or
//! parse errors, 2 when a family fails validation (the report is still written).

use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dilate::{
    colored_full_ck_dilation_with, compression_certificate, full_ck_dilation, one_step_dilation,
    required_inflation, DilationCertificate, COLORED_NODE_BUDGET,
};
use crate::error::{Error, Result};
use crate::family::{
    build_cycle_exact, build_fock, build_pi_v, build_rho_infty, OperatorFamily, DEFAULT_TOL,
};
use crate::graph::{select_tails, ColorId, Graph};
use crate::io::{
    read_family, read_graph, write_family, write_json, CertificateDoc, Meta, MultiplicityDoc, ReportDoc, WoldDoc,
};
use crate::staralg::{normal_form_expression, parse_expression};
use crate::verify::{check_relations, commutant_dimension_with_guard, Classification, RelationReport};
use crate::wold::wold_decompose;

#[derive(Debug, Parser)]
#[command(name = "ckbench", version, about = "Toeplitz-Cuntz-Krieger families of finite graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuildKind {
    Fock,
    PiV,
    Rho,
    CycleExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DilationMode {
    /// Full-CK dilation for one color, joint dilation otherwise.
    Auto,
    OneStep,
    Full,
    Colored,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the relations and classify a family.
    Verify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Wold decomposition: multiplicities of the π_v summands.
    Wold {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dilate a family and certify the compression.
    Dilate {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated color names for the joint dilation.
        #[arg(long, value_delimiter = ',')]
        color_order: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = DilationMode::Auto)]
        mode: DilationMode,
        /// Singular vertex for the one-step mode.
        #[arg(long)]
        vertex: Option<String>,
        /// Inflation for the one-step mode; the smallest sufficient one by default.
        #[arg(long)]
        inflation: Option<usize>,
        /// Dilated family file.
        #[arg(long)]
        out: PathBuf,
        /// Certificate file; defaults to `<out stem>.certificate.json`.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rewrite an expression in `p(v)`, `s(e)`, `s*(e)` to normal form.
    Normalform {
        #[arg(long)]
        graph: PathBuf,
        expression: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Relations, singular vertices, Wold multiplicities and a commutant probe.
    Report {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a standard family for a graph.
    Build {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        kind: BuildKind,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Normal-form output document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormDoc {
    pub meta: Meta,
    pub input: String,
    pub normal_form: String,
    pub terms: usize,
}

/// Combined output of `report`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullReportDoc {
    pub meta: Meta,
    pub relations: RelationReport,
    pub multiplicities: Option<Vec<MultiplicityDoc>>,
    pub wold_error: Option<String>,
    pub commutant_dimension: Option<usize>,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Invalid(format!("--{name} must be positive, got {x}")))
    }
}

fn load(path: &FsPath, tol: Option<f64>) -> Result<OperatorFamily> {
    let fam = read_family(path).map_err(|e| with_path(e, path))?;
    Ok(match tol {
        Some(t) => fam.with_tol(positive("tol", t)?),
        None => fam,
    })
}

fn with_path(e: Error, path: &FsPath) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn fmt_e(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn render_report(r: &RelationReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "dimension {}  classification {}  tolerance {}\n",
        r.dimension,
        r.classification,
        fmt_e(r.tolerance)
    ));
    s.push_str(&format!(
        "projections {}  orthogonality {}  sum excess {}  interior commutator {}\n",
        fmt_e(r.projection_residual),
        fmt_e(r.orthogonality_residual),
        fmt_e(r.sum_excess),
        fmt_e(r.interior_commutator)
    ));
    for c in &r.colors {
        s.push_str(&format!("color {}  {}\n", c.color, c.classification));
        s.push_str(&format!("  {:<12} {:>12} {:>12}\n", "edge", "isometry", "support"));
        for e in &c.edges {
            s.push_str(&format!("  {:<12} {:>12} {:>12}\n", e.edge, fmt_e(e.isometry), fmt_e(e.support)));
        }
        s.push_str(&format!(
            "  {:<12} {:>9} {:>12} {:>12} {:>5}\n",
            "vertex", "received", "tck slack", "defect", "rank"
        ));
        for v in &c.vertices {
            s.push_str(&format!(
                "  {:<12} {:>9} {:>12} {:>12} {:>5}{}\n",
                v.vertex,
                if v.received { "yes" } else { "no" },
                fmt_e(v.tck_slack),
                fmt_e(v.defect_norm),
                v.defect_rank,
                if v.borderline { "  borderline" } else { "" }
            ));
        }
    }
    if r.singular.is_empty() {
        s.push_str("no singular vertices\n");
    } else {
        let list: Vec<String> = r
            .singular
            .iter()
            .map(|x| format!("{}@{} (rank {})", x.vertex, x.color, x.rank))
            .collect();
        s.push_str(&format!("singular: {}\n", list.join(", ")));
    }
    s
}

fn render_alpha(rows: &[MultiplicityDoc]) -> String {
    let mut s = format!("{:<12} {:>6}\n", "vertex", "alpha");
    for r in rows {
        s.push_str(&format!("{:<12} {:>6}\n", r.vertex, r.alpha));
    }
    s
}

fn certificate_with_degree(
    original: &OperatorFamily,
    dilated: &OperatorFamily,
    cert: DilationCertificate,
    max_degree: Option<usize>,
) -> Result<DilationCertificate> {
    match max_degree {
        Some(0) => Err(Error::Invalid("--max-degree must be positive".into())),
        Some(d) => {
            let mut c = compression_certificate(original, dilated, &cert.embedding, d)?;
            c.depth = cert.depth;
            Ok(c)
        }
        None => Ok(cert),
    }
}

fn color_order(g: &Graph, names: Option<&[String]>) -> Result<Vec<ColorId>> {
    match names {
        None => Ok(g.colors().collect()),
        Some(names) => names
            .iter()
            .map(|n| g.color_id(n.trim()))
            .collect::<Result<Vec<_>>>(),
    }
}

fn default_certificate_path(out: &FsPath) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dilation".into());
    out.with_file_name(format!("{stem}.certificate.json"))
}

/// Runs one command, writing human-readable text to `stdout`.
pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Verify { family, tol, out, seed } => {
            let fam = load(family, *tol)?;
            let report = check_relations(&fam);
            write!(stdout, "{}", render_report(&report))?;
            if let Some(path) = out {
                write_json(path, &ReportDoc { meta: Meta::new(fam.tol(), None, *seed), report: report.clone() })?;
            }
            Ok(if report.classification == Classification::Invalid { 2 } else { 0 })
        }
        Command::Wold { family, tol, out, seed } => {
            let fam = load(family, *tol)?;
            let w = wold_decompose(&fam)?;
            let doc = WoldDoc::from_decomposition(&w, fam.graph(), Meta::new(fam.tol(), None, *seed))?;
            write!(stdout, "{}", render_alpha(&doc.multiplicities))?;
            writeln!(
                stdout,
                "complement dimension {}  leakage {}  complement defect {}",
                w.complement.ncols(),
                fmt_e(w.diagnostics.leakage),
                fmt_e(w.diagnostics.complement_defect)
            )?;
            if let Some(path) = out {
                write_json(path, &doc)?;
            }
            Ok(0)
        }
        Command::Dilate {
            family,
            depth,
            max_degree,
            tol,
            color_order: order,
            mode,
            vertex,
            inflation,
            out,
            certificate,
            seed,
        } => {
            let fam = load(family, *tol)?;
            let g = fam.graph();
            let mode = match mode {
                DilationMode::Auto if g.color_count() > 1 => DilationMode::Colored,
                DilationMode::Auto => DilationMode::Full,
                m => *m,
            };
            let (original, dilated, cert) = match mode {
                DilationMode::OneStep => {
                    let name = vertex
                        .as_deref()
                        .ok_or_else(|| Error::Invalid("--vertex is required for one-step dilation".into()))?;
                    let v = g.vertex_id(name)?;
                    let m = match inflation {
                        Some(m) => *m,
                        None => required_inflation(&fam, v, *depth)?,
                    };
                    let (dil, cert) = one_step_dilation(&fam, v, m, *depth)?;
                    (crate::dilate::inflate(&fam, m)?, dil, cert)
                }
                DilationMode::Full => {
                    let (dil, cert) = full_ck_dilation(&fam, *depth)?;
                    (fam.clone(), dil, cert)
                }
                _ => {
                    let order = color_order(g, order.as_deref())?;
                    let (dil, cert) = colored_full_ck_dilation_with(&fam, *depth, &order, COLORED_NODE_BUDGET)?;
                    (fam.clone(), dil, cert)
                }
            };
            let cert = certificate_with_degree(&original, &dilated, cert, *max_degree)?;
            let meta = Meta::new(fam.tol(), Some(*depth), *seed);
            write_family(out, &dilated, Some(meta.clone()))?;
            let cert_path = certificate.clone().unwrap_or_else(|| default_certificate_path(out));
            write_json(&cert_path, &CertificateDoc::from_certificate(&cert, meta)?)?;
            writeln!(
                stdout,
                "dimension {} -> {}  compression error {} (degree <= {}, {} monomials)  max defect {}  depth {}  {}",
                original.dim(),
                dilated.dim(),
                fmt_e(cert.compression_error),
                cert.max_degree,
                cert.monomials_checked,
                fmt_e(cert.max_defect),
                cert.depth,
                if cert.complete { "complete" } else { "partial" }
            )?;
            Ok(0)
        }
        Command::Normalform { graph, expression, out, seed } => {
            let g = Arc::new(read_graph(graph).map_err(|e| with_path(e, graph))?);
            let expr = parse_expression(&g, expression)?;
            let nf = normal_form_expression(&g, &expr)?;
            let text = nf.render();
            writeln!(stdout, "{text}")?;
            if let Some(path) = out {
                write_json(
                    path,
                    &NormalFormDoc {
                        meta: Meta::new(DEFAULT_TOL, None, *seed),
                        input: expression.clone(),
                        normal_form: text,
                        terms: nf.terms().len(),
                    },
                )?;
            }
            Ok(0)
        }
        Command::Report { family, tol, out, seed } => {
            let fam = load(family, *tol)?;
            let relations = check_relations(&fam);
            write!(stdout, "{}", render_report(&relations))?;
            let (multiplicities, wold_error) = if relations.classification == Classification::Invalid {
                (None, Some("family is not TCK".to_string()))
            } else if fam.graph().color_count() > 1 {
                (None, Some("Wold decomposition needs a single color".to_string()))
            } else {
                match wold_decompose(&fam) {
                    Ok(w) => {
                        let rows: Vec<MultiplicityDoc> = w
                            .multiplicities
                            .iter()
                            .map(|(v, a)| MultiplicityDoc {
                                vertex: fam.graph().vertex_name(*v).to_string(),
                                alpha: *a,
                            })
                            .collect();
                        write!(stdout, "{}", render_alpha(&rows))?;
                        (Some(rows), None)
                    }
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            let commutant = commutant_dimension_with_guard(&fam, 128).ok();
            if let Some(c) = commutant {
                writeln!(stdout, "commutant dimension {c}")?;
            }
            if let Some(path) = out {
                write_json(
                    path,
                    &FullReportDoc {
                        meta: Meta::new(fam.tol(), None, *seed),
                        relations: relations.clone(),
                        multiplicities,
                        wold_error,
                        commutant_dimension: commutant,
                    },
                )?;
            }
            Ok(if relations.classification == Classification::Invalid { 2 } else { 0 })
        }
        Command::Build { graph, kind, depth, vertex, out, seed } => {
            let g = read_graph(graph).map_err(|e| with_path(e, graph))?;
            let fam = match kind {
                BuildKind::Fock => build_fock(&g, *depth)?,
                BuildKind::PiV => {
                    let name = vertex
                        .as_deref()
                        .ok_or_else(|| Error::Invalid("--vertex is required for pi-v".into()))?;
                    build_pi_v(&g, g.vertex_id(name)?, *depth)?
                }
                BuildKind::Rho => build_rho_infty(&g, &select_tails(&g), *depth)?,
                BuildKind::CycleExact => build_cycle_exact(&g)?,
            };
            write_family(out, &fam, Some(Meta::new(fam.tol(), Some(*depth), *seed)))?;
            writeln!(stdout, "wrote {} (dimension {})", out.display(), fam.dim())?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
