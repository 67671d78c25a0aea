use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use magjump::forms::hodge;
use magjump::path::{reverse, LineIntegrator, Simulator};
use magjump::verify::{run_suite, DEFAULT_SEED};
use magjump::{fki, Complex64, MagneticOperator, OneForm, Orientation, ProblemSpec, WeightedGraph};

/// Environment variable consulted for the seed when neither `--seed` nor
/// the problem file sets one.
const SEED_ENV: &str = "MAGJUMP_SEED";

#[derive(Parser)]
#[command(name = "magjump", version, about = "Magnetic Schrödinger operators on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for CSV output (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// RNG seed; overrides the problem file and MAGJUMP_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Edge orientation of the line-integral increment.
    #[arg(long, global = true, value_enum, default_value_t = OrientationArg::FromTo)]
    orientation: OrientationArg,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a problem file.
    Validate { spec: PathBuf },
    /// Write the matrix of H as hamiltonian.csv.
    Hamiltonian { spec: PathBuf },
    /// Write the ascending eigenvalues of H as spectrum.csv.
    Spectrum { spec: PathBuf },
    /// Write e^{-tH} f for every run time as semigroup.csv.
    Semigroup { spec: PathBuf },
    /// Simulate paths and write one path_<i>.csv per path.
    Simulate { spec: PathBuf },
    /// Monte Carlo estimate of e^{-tH} f with z-scores, as fki.csv.
    Fki { spec: PathBuf },
    /// Hodge splitting of the magnetic potential.
    Hodge { spec: PathBuf },
    /// Run the invariant suite; exits nonzero if any check fails.
    Verify { spec: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    FromTo,
    ToFrom,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::FromTo => Orientation::FromTo,
            OrientationArg::ToFrom => Orientation::ToFrom,
        }
    }
}

struct Problem {
    spec: ProblemSpec,
    graph: WeightedGraph,
    a: OneForm,
}

impl Problem {
    fn load(path: &Path) -> Result<Self> {
        let spec = ProblemSpec::read(path)?;
        let graph = spec.graph()?;
        let a = spec.potential(&graph)?;
        Ok(Self { spec, graph, a })
    }

    fn operator(&self) -> Result<MagneticOperator> {
        Ok(MagneticOperator::assemble(&self.graph, &self.a, &self.spec.electric())?)
    }
}

fn resolve_seed(flag: Option<u64>, spec: &ProblemSpec) -> Result<u64> {
    if let Some(s) = flag.or(spec.run.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not a u64")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))
}

/// Formats a float, printing negative zero as `0`.
fn num(x: f64) -> String {
    (x + 0.0).to_string()
}

fn cx(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every executed check passed.
fn run(cli: &Cli) -> Result<bool> {
    let out = &cli.out;
    match &cli.command {
        Command::Validate { spec } => validate(spec),
        Command::Hamiltonian { spec } => {
            let p = Problem::load(spec)?;
            let h = p.operator()?;
            let m = h.matrix();
            let mut w = writer(out, "hamiltonian.csv")?;
            w.write_record(["row", "col", "re", "im"])?;
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let [re, im] = cx(m[(r, c)]);
                    w.write_record([p.graph.id(r), p.graph.id(c), &re, &im])?;
                }
            }
            w.flush()?;
            Ok(true)
        }
        Command::Spectrum { spec } => {
            let p = Problem::load(spec)?;
            let op = p.operator()?;
            let mut w = writer(out, "spectrum.csv")?;
            w.write_record(["k", "value"])?;
            for (k, x) in op.spectrum().iter().enumerate() {
                w.write_record([k.to_string(), num(*x)])?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Semigroup { spec } => {
            let p = Problem::load(spec)?;
            let op = p.operator()?;
            let f = p.spec.test_function();
            let mut w = writer(out, "semigroup.csv")?;
            w.write_record(["t", "vertex", "re", "im"])?;
            for &t in &p.spec.run.times {
                let u = op.semigroup_exact(t, &f)?;
                for x in 0..u.len() {
                    let [re, im] = cx(u[x]);
                    w.write_record([&t.to_string(), p.graph.id(x), &re, &im])?;
                }
            }
            w.flush()?;
            Ok(true)
        }
        Command::Simulate { spec } => simulate(cli, spec),
        Command::Fki { spec } => {
            let p = Problem::load(spec)?;
            let seed = resolve_seed(cli.seed, &p.spec)?;
            let op = p.operator()?;
            let (v, f) = (p.spec.electric(), p.spec.test_function());
            let mut w = writer(out, "fki.csv")?;
            w.write_record([
                "t", "vertex", "mean_re", "mean_im", "stderr_re", "stderr_im", "exact_re", "exact_im", "z",
            ])?;
            let mut ok = true;
            for &t in &p.spec.run.times {
                let est = fki::estimate_vector_oriented(
                    &p.graph,
                    &p.a,
                    &v,
                    &f,
                    t,
                    p.spec.run.num_paths,
                    seed,
                    cli.orientation.into(),
                )?;
                let cmp = fki::compare_exact(&est, &op, &f)?;
                for x in 0..p.graph.len() {
                    let [mr, mi] = cx(est.mean[x]);
                    let [er, ei] = cx(cmp.exact[x]);
                    w.write_record([
                        &t.to_string(),
                        p.graph.id(x),
                        &mr,
                        &mi,
                        &est.stderr[x].re.to_string(),
                        &est.stderr[x].im.to_string(),
                        &er,
                        &ei,
                        &cmp.z[x].to_string(),
                    ])?;
                }
                let tol = &p.spec.run.tolerances;
                let frac = cmp.fraction_within(tol.z_limit);
                let pass = frac >= tol.z_fraction;
                ok &= pass;
                println!(
                    "t={t}: {:.1}% of vertices with z <= {} (max z {:.2}) {}",
                    100.0 * frac,
                    tol.z_limit,
                    cmp.max_z(),
                    if pass { "PASS" } else { "FAIL" }
                );
            }
            w.flush()?;
            Ok(ok)
        }
        Command::Hodge { spec } => {
            let p = Problem::load(spec)?;
            let h = hodge(&p.graph, &p.a)?;
            let mut w = writer(out, "hodge_u.csv")?;
            w.write_record(["vertex", "re", "im"])?;
            for x in 0..p.graph.len() {
                let [re, im] = cx(h.potential[x]);
                w.write_record([p.graph.id(x), &re, &im])?;
            }
            w.flush()?;
            let mut w = writer(out, "hodge_eta.csv")?;
            w.write_record(["p", "q", "a", "du", "eta"])?;
            for (k, e) in p.graph.edges().iter().enumerate() {
                w.write_record([
                    p.graph.id(e.lo),
                    p.graph.id(e.hi),
                    &num(p.a.values()[k].re),
                    &num(h.exact.values()[k].re),
                    &num(h.harmonic.values()[k].re),
                ])?;
            }
            w.flush()?;
            println!("solve residual {:.3e}", h.residual);
            Ok(true)
        }
        Command::Verify { spec } => {
            let p = Problem::load(spec)?;
            let seed = resolve_seed(cli.seed, &p.spec)?;
            let results = run_suite(&p.spec, seed)?;
            let mut w = writer(out, "verify.csv")?;
            w.write_record(["check", "measured", "tolerance", "passed"])?;
            for r in &results {
                println!("{r}");
                w.write_record([
                    r.name.as_str(),
                    &r.measured.to_string(),
                    &r.tolerance.to_string(),
                    &r.passed.to_string(),
                ])?;
            }
            w.flush()?;
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {failed} failed (seed {seed})", results.len());
            Ok(failed == 0)
        }
    }
}

fn validate(spec: &Path) -> Result<bool> {
    let p = Problem::load(spec)?;
    let violations = p.graph.validate();
    for v in &violations {
        println!("violation: {v}");
    }
    if violations.is_empty() {
        println!(
            "ok: {} vertices, {} edges, {} times",
            p.graph.len(),
            p.graph.edges().len(),
            p.spec.run.times.len()
        );
    }
    Ok(violations.is_empty())
}

fn simulate(cli: &Cli, spec: &Path) -> Result<bool> {
    let p = Problem::load(spec)?;
    let seed = resolve_seed(cli.seed, &p.spec)?;
    let run = &p.spec.run;
    let start = match &run.start {
        Some(id) => p.graph.index_of(id)?,
        None => 0,
    };
    let sim = Simulator::new(&p.graph);
    let integ = LineIntegrator::with_orientation(&p.graph, &p.a, cli.orientation.into())?;
    let mut summary = writer(&cli.out, "paths.csv")?;
    summary.write_record(["path", "jumps", "end", "stratonovich", "divergence", "martingale", "reversed"])?;
    for i in 0..run.num_dump {
        let path = sim.simulate(start, run.horizon, seed, i as u64)?;
        let mut w = writer(&cli.out, &format!("path_{i}.csv"))?;
        w.write_record(["time", "from", "to"])?;
        for (t, from, to) in path.transitions() {
            w.write_record([&t.to_string(), p.graph.id(from), p.graph.id(to)])?;
        }
        w.flush()?;
        let s = integ.stratonovich(&path);
        summary.write_record([
            i.to_string(),
            path.num_jumps().to_string(),
            p.graph.id(path.end_state()).to_string(),
            num(s),
            num(integ.divergence_part(&path)),
            num(integ.martingale(&path)),
            num(integ.stratonovich(&reverse(&path, run.horizon)?)),
        ])?;
    }
    summary.flush()?;
    println!("wrote {} paths to {}", run.num_dump, cli.out.display());
    Ok(true)
}
