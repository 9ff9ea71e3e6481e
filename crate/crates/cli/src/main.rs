use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use matchfield::combinat::{block_diagonal, intermediate, MatchingField};
use matchfield::mutation::{execute, plan, step_log, StepReport, VerifyOptions};
use matchfield::polytope::{self, matching_field_polytope, rat_to_string};
use matchfield::toric::degeneration_certificate;
use matchfield::weightmat::{induced_weight_vector, m_ell, m_ell_lambda, WeightMatrix};
use matchfield::Error;

#[derive(Parser)]
#[command(name = "matchfield", version, about = "Block diagonal matching fields of Grassmannians")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the payload here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone, Copy)]
struct FieldArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    lambda: Option<usize>,
}

#[derive(Args, Clone, Copy)]
struct ChainArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print a block diagonal or intermediate matching field.
    Generate(FieldArgs),
    /// Print its weight matrix and the induced Plücker weights.
    Weights(FieldArgs),
    /// Vertices, dimension, volume and lattice points of its polytope.
    Polytope(FieldArgs),
    /// Run a mutation plan and report every step.
    Mutate {
        #[command(flatten)]
        chain: ChainArgs,
        /// Also write the JSON step log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a mutation plan; exit 1 unless every step verifies.
    Verify(ChainArgs),
    /// Degree-2 toric degeneration certificate.
    Certify(FieldArgs),
}

impl FieldArgs {
    fn name(&self) -> String {
        match self.lambda {
            None => format!("B_{} on Gr({},{})", self.ell, self.k, self.n),
            Some(l) => format!("B_{}^{} on Gr({},{})", self.ell, l, self.k, self.n),
        }
    }

    fn field(&self) -> matchfield::Result<MatchingField> {
        match self.lambda {
            None => block_diagonal(self.k, self.n, self.ell),
            Some(l) => intermediate(self.k, self.n, self.ell, l),
        }
    }

    fn matrix(&self) -> matchfield::Result<WeightMatrix> {
        match self.lambda {
            None => m_ell(self.k, self.n, self.ell),
            Some(l) => m_ell_lambda(self.k, self.n, self.ell, l),
        }
    }
}

struct Outcome {
    payload: String,
    ok: bool,
}

fn done(payload: String) -> Result<Outcome> {
    Ok(Outcome { payload, ok: true })
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn tableau_columns(field: &MatchingField) -> String {
    let tabs = field.tableaux();
    let width = field.n().to_string().len();
    let mut s = String::new();
    for r in 0..field.k() {
        let row: Vec<String> = tabs.iter().map(|t| format!("{:>width$}", t.rows()[r])).collect();
        writeln!(s, "{}", row.join("  ")).unwrap();
    }
    s
}

fn generate(a: FieldArgs, fmt: Format) -> Result<Outcome> {
    let field = a.field()?;
    match fmt {
        Format::Json => done(pretty(&field)?),
        Format::Text => done(format!("{}\n{}", a.name(), tableau_columns(&field))),
    }
}

fn weights(a: FieldArgs, fmt: Format) -> Result<Outcome> {
    let m = a.matrix()?;
    let w = induced_weight_vector(&m, a.k, a.n)?;
    match fmt {
        Format::Json => done(pretty(&json!({ "matrix": m, "weights": w }))?),
        Format::Text => {
            let mut s = format!("weight matrix for {}\n", a.name());
            for row in m.entries() {
                writeln!(s, "  {}", row.iter().map(|x| format!("{x:>3}")).collect::<String>())?;
            }
            let labels = matchfield::combinat::enumerate_subsets(a.k, a.n)?;
            let parts: Vec<String> = labels.iter().zip(&w.0).map(|(s, x)| format!("{}:{x}", s.label())).collect();
            writeln!(s, "weights ({})", w.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))?;
            writeln!(s, "  {}", parts.join(" "))?;
            done(s)
        }
    }
}

fn polytope_cmd(a: FieldArgs, fmt: Format) -> Result<Outcome> {
    let field = a.field()?;
    let p = matching_field_polytope(&field);
    let verts = p.vertices()?;
    let dim = p.dim()?;
    let vol = p.normalized_volume()?;
    let lattice = match p.lattice_points() {
        Ok(pts) => Some(pts.len()),
        Err(Error::ScaleLimit(_)) => None,
        Err(e) => return Err(e.into()),
    };
    match fmt {
        Format::Json => done(pretty(&json!({
            "polytope": p,
            "vertices": verts,
            "dim": dim,
            "normalized_volume": rat_to_string(&polytope::Rat::from_integer(vol.into())),
            "lattice_points": lattice,
        }))?),
        Format::Text => {
            let mut s = format!("{}\n", a.name());
            writeln!(s, "vertices: {}", verts.len())?;
            for v in &verts {
                let ints = v.to_ints()?;
                let rows: Vec<String> = ints
                    .chunks(a.n)
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<String>())
                    .collect();
                writeln!(s, "  {}", rows.join(" "))?;
            }
            writeln!(s, "dimension: {dim}")?;
            writeln!(s, "normalized volume: {vol}")?;
            match lattice {
                Some(c) => writeln!(s, "lattice points: {c}")?,
                None => writeln!(s, "lattice points: too many to enumerate")?,
            }
            done(s)
        }
    }
}

fn run_chain(c: ChainArgs, opts: &VerifyOptions) -> Result<(matchfield::mutation::Plan, Vec<StepReport>)> {
    let p = plan(c.k, c.n, c.from, c.to)?;
    let start = block_diagonal(c.k, c.n, c.from)?;
    let reports = execute(&p, &start, opts)?;
    Ok((p, reports))
}

fn report_lines(reports: &[StepReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let status = if r.passed { "ok  " } else { "FAIL" };
        write!(s, "{status} {:>3} {:<9} {:<16} -> {:<22} vol {}", r.index, r.kind, r.label, r.target, r.volume_after)
            .unwrap();
        if r.kind == "tropical" {
            let c = r.inner_product_classes;
            write!(s, "  classes -1:{} 0:{} +1:{}  crossing edges {}/{}", c.minus, c.zero, c.plus, r.crossing_edges, r.class_crossing_pairs)
                .unwrap();
        }
        if let Some((a, b)) = r.lattice_points {
            write!(s, "  lattice {a}/{b}").unwrap();
        }
        s.push('\n');
        for f in &r.failures {
            writeln!(s, "       {f}").unwrap();
        }
    }
    s
}

fn mutate(c: ChainArgs, log: Option<PathBuf>, fmt: Format) -> Result<Outcome> {
    let (p, reports) = run_chain(c, &VerifyOptions::default())?;
    let entries = step_log(&p, &reports);
    let body = json!({ "k": c.k, "n": c.n, "from": c.from, "to": c.to, "steps": entries });
    if let Some(path) = log {
        std::fs::write(&path, pretty(&body)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let ok = reports.iter().all(|r| r.passed);
    let payload = match fmt {
        Format::Json => pretty(&body)?,
        Format::Text => format!("B_{} -> B_{} on Gr({},{})\n{}", c.from, c.to, c.k, c.n, report_lines(&reports)),
    };
    Ok(Outcome { payload, ok })
}

fn verify(c: ChainArgs, fmt: Format) -> Result<Outcome> {
    let opts = VerifyOptions { lattice_point_limit: 0, ..VerifyOptions::default() };
    let (_, reports) = run_chain(c, &opts)?;
    let ok = reports.iter().all(|r| r.passed);
    let payload = match fmt {
        Format::Json => pretty(&json!({ "passed": ok, "reports": reports }))?,
        Format::Text => {
            let verdict = if ok { "all steps verified" } else { "verification failed" };
            format!("{}{verdict}\n", report_lines(&reports))
        }
    };
    Ok(Outcome { payload, ok })
}

fn certify(a: FieldArgs, fmt: Format) -> Result<Outcome> {
    let mut cert = degeneration_certificate(&a.field()?, &a.matrix()?)?;
    cert.field = a.name();
    let ok = cert.certified();
    let payload = match fmt {
        Format::Json => pretty(&cert)?,
        Format::Text => format!(
            "{}\nvolume {} (reference {})\ndegree-2 initial forms binomial: {}\ndegree-2 initial forms in toric ideal: {}\n{}\n",
            cert.field,
            cert.volume,
            cert.reference_volume,
            cert.all_deg2_initials_binomial,
            cert.all_deg2_initials_in_j,
            cert.verdict
        ),
    };
    Ok(Outcome { payload, ok })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidParameters(_) | Error::Precondition(_) | Error::NotCoherent(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = cli.format;
    let result = match cli.command {
        Command::Generate(a) => generate(a, fmt),
        Command::Weights(a) => weights(a, fmt),
        Command::Polytope(a) => polytope_cmd(a, fmt),
        Command::Mutate { chain, log } => mutate(chain, log, fmt),
        Command::Verify(c) => verify(c, fmt),
        Command::Certify(a) => certify(a, fmt),
    };
    match result {
        Ok(out) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &out.payload).with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{}", out.payload);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
