//! Command-line front end: argument parsing, the subcommands and report
//! formatting. The binary only calls [`main_with_args`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backends;
use crate::battery;
use crate::coend::{projective_checks, CoendData, ProjectiveCoend};
use crate::completion::{c_equivalence_check, CatPresentation};
use crate::corpus;
use crate::diagrams::{Diagram, Point};
use crate::error::{Error, Result};
use crate::eval::Session;
use crate::hopf::{HopfPresentation, Manifest, StructuralElements};
use crate::topology::{l_prime, linking_signature, sphere_pairing, state_space_rank, DecoratedSurface, PairingProblem, SurgeryDatum};
use cyclo::MatrixS;

#[derive(Parser, Debug)]
#[command(name = "bichrome", version, about = "Renormalized 3-manifold invariants from non-semisimple ribbon Hopf algebras")]
pub struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for pairing-matrix entries.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct BackendArg {
    /// Manifest path, or the name of a shipped backend (abelian_modular, uqsl2).
    pub manifest: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every Hopf, quasitriangular and ribbon axiom of a manifest.
    Validate(BackendArg),
    /// Simples, projective covers, the generator and stabilization constants.
    Reps(BackendArg),
    /// Solve for the modified trace and compare with the integral formula.
    Modtrace(BackendArg),
    /// Evaluate a .bg diagram with red components.
    Eval {
        #[command(flatten)]
        backend: BackendArg,
        file: PathBuf,
    },
    /// L'_C of a closed admissible diagram read as a surgery presentation.
    Invariant {
        #[command(flatten)]
        backend: BackendArg,
        file: PathBuf,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        defect: i64,
    },
    /// Rank of the genus 0 pairing for marked points such as `+P1,-V2`.
    Statespace {
        #[command(flatten)]
        backend: BackendArg,
        labels: String,
        /// Comma-separated .bg files for the incoming family.
        #[arg(long = "in", value_delimiter = ',')]
        in_family: Vec<PathBuf>,
        /// Comma-separated .bg files for the outgoing family.
        #[arg(long = "out", value_delimiter = ',')]
        out_family: Vec<PathBuf>,
        /// Random combinations added to each default family.
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print the pairing matrix.
        #[arg(long)]
        dump: bool,
    },
    /// Coend identities and the projective coend battery for every cover.
    CoendSuite {
        #[command(flatten)]
        backend: BackendArg,
        #[arg(long, default_value_t = 5)]
        seed: u64,
    },
    /// Karoubi, additive completion and dominating sets for a presentation.
    CompletionCheck {
        /// A category presentation in JSON.
        presentation: Option<PathBuf>,
        /// Build the presentation on 1, the covers and G of this backend instead.
        #[arg(long)]
        backend: Option<String>,
        /// Comma-separated object names of the candidate dominating set.
        #[arg(long, value_delimiter = ',')]
        dominating: Vec<String>,
        /// Write the presentation as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run the full acceptance battery on the shipped backends.
    Selftest,
}

/// One named check in a report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub witness: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BackendSummary {
    pub id: String,
    pub dim: usize,
    pub cyclotomic_order: u32,
    pub axioms_passed: usize,
    pub axioms_total: usize,
}

/// The comparable part of a run: no timings, no paths beyond the command echo.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<(String, String)>,
}

impl RunReport {
    fn check(&mut self, name: impl Into<String>, pass: bool, witness: impl Into<String>) {
        self.checks.push(CheckLine { name: name.into(), pass, witness: witness.into() });
    }

    fn value(&mut self, name: impl Into<String>, v: impl ToString) {
        self.values.push((name.into(), v.to_string()));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        if let Some(b) = &self.backend {
            s.push_str(&format!(
                "backend: {} (dim {}, Q(zeta_{}), {}/{} axioms)\n",
                b.id, b.dim, b.cyclotomic_order, b.axioms_passed, b.axioms_total
            ));
        }
        for c in &self.checks {
            let tag = if c.pass { "pass" } else { "FAIL" };
            if c.witness.is_empty() {
                s.push_str(&format!("[{tag}] {}\n", c.name));
            } else {
                s.push_str(&format!("[{tag}] {}: {}\n", c.name, c.witness));
            }
        }
        for (k, v) in &self.values {
            if v.contains('\n') {
                s.push_str(&format!("{k} =\n{v}\n"));
            } else {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s
    }
}

fn matrix_text(m: &MatrixS) -> String {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect::<Vec<_>>().join(", "))
        .map(|r| format!("  [{r}]"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// Resolve a manifest argument: a file, a shipped manifest, or a built-in backend.
pub fn load_backend(spec: &str) -> Result<HopfPresentation> {
    let p = Path::new(spec);
    if p.exists() {
        let mut h = Manifest::load(p)?.to_presentation()?;
        if h.name == "backend" {
            h.name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.into());
        }
        return Ok(h);
    }
    if let Some(h) = corpus::shipped(spec) {
        return h;
    }
    backends::builtin(spec).ok_or_else(|| Error::Usage(format!("{spec} is neither a file nor a known backend")))
}

fn summary(h: &HopfPresentation) -> (BackendSummary, crate::hopf::ValidationReport) {
    let v = h.validate();
    let s = BackendSummary {
        id: h.name.clone(),
        dim: h.d,
        cyclotomic_order: h.f.order(),
        axioms_passed: v.checks.iter().filter(|c| c.pass).count(),
        axioms_total: v.checks.len(),
    };
    (s, v)
}

/// A validated session, or the validation error (exit code 3).
fn session(spec: &str, report: &mut RunReport) -> Result<Session> {
    let h = load_backend(spec)?;
    let (s, v) = summary(&h);
    report.backend = Some(s);
    if let Some(bad) = v.first_failure() {
        return Err(Error::AxiomViolation { name: bad.name.clone(), witness: bad.witness.clone() });
    }
    Session::new(h)
}

fn parse_labels(s: &str) -> Result<Vec<Point>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let (sign, name) = t.split_at(t.chars().next().map(char::len_utf8).unwrap_or(0));
            match sign {
                "+" if !name.is_empty() => Ok(Point::blue(name, true)),
                "-" if !name.is_empty() => Ok(Point::blue(name, false)),
                _ => Err(Error::Usage(format!("label {t:?} must look like +NAME or -NAME"))),
            }
        })
        .collect()
}

/// How a report with failing checks ends the process.
fn failure_code(cmd: &Command) -> i32 {
    match cmd {
        Command::Validate(_) => 3,
        _ => 4,
    }
}

fn run_command(cli: &Cli, report: &mut RunReport) -> Result<()> {
    match &cli.command {
        Command::Validate(b) => {
            let h = load_backend(&b.manifest)?;
            let (s, v) = summary(&h);
            report.backend = Some(s);
            for c in &v.checks {
                let w = if c.witness.is_empty() { String::new() } else { format!("{:?}", c.witness) };
                report.check(&c.name, c.pass, w);
            }
            if v.all_pass() {
                report.check("factorizable (Drinfeld map bijective)", h.factorizability_check(), format!("rank {}", h.drinfeld_rank()));
                let se = StructuralElements::compute(&h)?;
                report.check("unimodular", se.unimodular, "");
            }
        }
        Command::Reps(b) => {
            let s = session(&b.manifest, report)?;
            let pd = &s.pd;
            report.value("semisimple", pd.semisimple);
            for (v, p) in pd.simples.iter().zip(&pd.covers) {
                report.value(format!("simple {}", v.name), format!("dim {}, cover {} of dim {}", v.dim, p.name, p.dim));
            }
            report.value("generator G", format!("dim {}, dim End(G) = {}", pd.generator.dim, s.cat.hom_dim(&pd.generator, &pd.generator)));
            let st = &s.stab;
            report.value("Delta+", &st.delta_plus);
            report.value("Delta-", &st.delta_minus);
            report.value("D", &st.d);
            report.value("delta", &st.delta);
            report.value("zeta = D^2", &st.zeta);
        }
        Command::Modtrace(b) => {
            let s = session(&b.manifest, report)?;
            let sol = &s.trace.solution;
            report.check("solution space is 1-dimensional", sol.nullity == 1, format!("nullity {}", sol.nullity));
            let n = s.pd.eta1.matrix.try_mul(&s.pd.eps1.matrix)?;
            let t = s.trace(&s.pd.covers[0], &n)?;
            report.check("t_P1(eta1 o eps1) = 1", t.is_one(), t.to_string());
            let mism = s.oracle_mismatch()?;
            report.check("solver equals the integral formula", mism.is_none(), mism.unwrap_or_default());
            let bad = s.check_partial_traces(20, 7)?;
            report.check("partial trace property on 20 samples", bad.is_empty(), bad.join("; "));
            report.value("equations", sol.equations);
            for ((_, x), vals) in sol.probes.iter().zip(&sol.values) {
                let v: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                report.value(format!("t on End({}) basis", x.name), format!("[{}]", v.join(", ")));
            }
        }
        Command::Eval { backend, file } => {
            let s = session(&backend.manifest, report)?;
            let d = Diagram::parse(&read(file)?)?;
            let ev = s.lrt_evaluate(&d)?;
            let pts = |p: &[Point]| if p.is_empty() { "1".to_string() } else { p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ") };
            report.value("source", pts(&ev.input));
            report.value("target", pts(&ev.output));
            if d.is_closed()? {
                report.value("F", ev.scalar());
                if s.is_admissible(&d)? {
                    report.value("F'", s.renormalized_evaluate(&d)?);
                }
            } else {
                report.value("F", matrix_text(&ev.matrix));
                if ev.input.len() == 1 && ev.input == ev.output && s.label_is_projective(&d, &ev.input[0].label) {
                    report.value("t(F)", s.renormalized_cut(&d)?);
                }
            }
        }
        Command::Invariant { backend, file, defect } => {
            let s = session(&backend.manifest, report)?;
            let d = Diagram::parse(&read(file)?)?;
            if !d.is_closed()? {
                return Err(Error::NotClosed);
            }
            if !s.is_admissible(&d)? {
                return Err(Error::NotAdmissible(" (no projective blue edge)".into()));
            }
            let (l, sigma) = linking_signature(&d)?;
            report.value("red components", l);
            report.value("signature", sigma);
            report.value("defect", defect);
            report.value("F'", s.renormalized_evaluate(&d)?);
            report.value("L'", l_prime(&s, &SurgeryDatum::new(d, *defect))?);
        }
        Command::Statespace { backend, labels, in_family, out_family, extra, seed, dump } => {
            let s = session(&backend.manifest, report)?;
            let pts = parse_labels(labels)?;
            let p = if in_family.is_empty() && out_family.is_empty() {
                sphere_pairing(&s, &pts, *extra, *seed, cli.jobs)?
            } else {
                if in_family.is_empty() || out_family.is_empty() {
                    return Err(Error::Usage("--in and --out must be given together".into()));
                }
                let load = |fs: &[PathBuf]| -> Result<Vec<SurgeryDatum>> {
                    fs.iter().map(|f| Ok(SurgeryDatum::new(Diagram::parse(&read(f)?)?, 0))).collect()
                };
                PairingProblem::build(&s, DecoratedSurface::sphere(pts), load(in_family)?, load(out_family)?, cli.jobs)?
            };
            report.value("in family", p.in_family.len());
            report.value("out family", p.out_family.len());
            report.value("rank", state_space_rank(&p));
            if *dump {
                report.value("pairing", matrix_text(&p.matrix));
            }
        }
        Command::CoendSuite { backend, seed } => {
            let s = session(&backend.manifest, report)?;
            let c = CoendData::build(&s)?;
            for ch in c.checks(&s, *seed) {
                report.check(ch.name, ch.pass, ch.detail);
            }
            for v in s.pd.covers.clone() {
                let pc = ProjectiveCoend::build(&s, &c, &v)?;
                for ch in projective_checks(&s, &c, &pc, *seed)? {
                    report.check(ch.name, ch.pass, ch.detail);
                }
                match pc.factor_boxtimes(&s.cat, &s.pd.generator) {
                    Ok(parts) => report.check(format!("[{}] ℓ_V = Σ ℓ'⊗ℓ'' reassembles", v.name), true, format!("{} terms", parts.len())),
                    Err(e) => report.check(format!("[{}] ℓ_V = Σ ℓ'⊗ℓ'' reassembles", v.name), false, e.to_string()),
                }
            }
        }
        Command::CompletionCheck { presentation, backend, dominating, export } => {
            // with a backend, the presentation is {1} ∪ Proj and domination is
            // asked of the projective objects
            let (pres, targets): (CatPresentation, Vec<usize>) = match (presentation, backend) {
                (Some(p), None) => {
                    let pres = CatPresentation::from_json(&read(p)?)?;
                    let all = (0..pres.len()).collect();
                    (pres, all)
                }
                (None, Some(b)) => {
                    let s = session(b, report)?;
                    let mut objs = vec![s.cat.trivial.clone()];
                    objs.extend(s.pd.covers.iter().cloned());
                    objs.push(s.pd.generator.clone());
                    (CatPresentation::from_reps(&s.cat, &objs)?, (1..objs.len()).collect())
                }
                _ => return Err(Error::Usage("give either a presentation file or --backend".into())),
            };
            report.check("presentation is a category (units, associativity)", pres.validate().is_ok(), "");
            report.value("objects", pres.objects.join(", "));
            let names = |ix: &[usize]| ix.iter().map(|&i| pres.objects[i].as_str()).collect::<Vec<_>>().join(", ");
            report.value("targets", names(&targets));
            for x in 0..pres.len() {
                report.value(format!("primitive idempotents of End({})", pres.objects[x]), pres.primitive_idempotents(x)?.len());
            }
            let k = pres.default_karoubi()?;
            report.value("Karoubi objects", k.objects.join(", "));
            if !dominating.is_empty() {
                let idx = dominating
                    .iter()
                    .map(|n| pres.objects.iter().position(|o| o == n).ok_or_else(|| Error::UnknownLabel(n.clone())))
                    .collect::<Result<Vec<_>>>()?;
                report.value(format!("dominates({{{}}})", dominating.join(", ")), pres.dominates_objects(&idx, &targets));
                let (ambient, _) = pres.full_subcategory(&targets)?;
                let inner: Option<Vec<usize>> = idx.iter().map(|i| targets.iter().position(|t| t == i)).collect();
                let ceq = match inner {
                    Some(inner) => {
                        let (sub, emb) = ambient.full_subcategory(&inner)?;
                        c_equivalence_check(&sub, &ambient, &emb)
                    }
                    None => false,
                };
                report.value(format!("embedding into {{{}}} is a c-equivalence", names(&targets)), ceq);
            }
            if let Some(path) = export {
                std::fs::write(path, pres.to_json()).map_err(|e| Error::Io { path: path.display().to_string(), msg: e.to_string() })?;
            }
        }
        Command::Selftest => {
            battery::run_each(cli.jobs.max(1), |o| report.check(format!("{:>2} {}", o.id, o.title), o.pass, o.detail.clone()));
        }
    }
    Ok(())
}

fn command_echo(args: &[String]) -> String {
    let mut v = vec!["bichrome".to_string()];
    let mut skip = false;
    for a in args.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        // the parallelism setting does not change any result
        if a == "--jobs" {
            skip = true;
            continue;
        }
        if a.starts_with("--jobs=") || a == "--json" {
            continue;
        }
        v.push(a.clone());
    }
    v.join(" ")
}

fn cache_key(echo: &str) -> String {
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    for a in echo.split(' ') {
        h.update(a.as_bytes());
        h.update([0]);
        if let Ok(bytes) = std::fs::read(a) {
            h.update(&bytes);
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn cacheable(cmd: &Command) -> bool {
    matches!(cmd, Command::Eval { .. } | Command::Invariant { .. } | Command::Statespace { .. } | Command::CoendSuite { .. })
}

/// Parse the arguments, run, print the report and return the exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let echo = command_echo(&args);
    let cache = std::env::var_os("BICHROME_CACHE_DIR").filter(|_| cacheable(&cli.command)).map(PathBuf::from);
    let cached = cache.as_ref().map(|dir| dir.join(format!("{}.json", cache_key(&echo))));
    let hit: Option<RunReport> = cached.as_ref().and_then(|p| std::fs::read_to_string(p).ok()).and_then(|t| serde_json::from_str(&t).ok());
    let mut report = RunReport { command: echo, ..Default::default() };
    let outcome = match hit {
        Some(r) => {
            report = r;
            Ok(())
        }
        None => run_command(&cli, &mut report),
    };
    let code = match &outcome {
        Ok(()) if report.all_pass() => 0,
        Ok(()) => failure_code(&cli.command),
        Err(e) => e.exit_code(),
    };
    if code == 0 {
        if let (Some(dir), Some(p)) = (&cache, &cached) {
            if std::fs::create_dir_all(dir).is_ok() {
                let _ = std::fs::write(p, serde_json::to_string(&report).expect("report serializes"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    // a closed pipe on stdout is not an error of the computation
    let mut out = std::io::stdout().lock();
    if cli.json {
        let mut v = serde_json::json!({ "report": report, "exit_code": code, "timing": { "seconds": elapsed } });
        if let Err(e) = &outcome {
            v["error"] = serde_json::Value::String(e.to_string());
        }
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        let _ = write!(out, "{}", report.to_text());
        if let Err(e) = &outcome {
            eprintln!("error: {e}");
        }
        let _ = writeln!(out, "# elapsed {elapsed:.2}s");
    }
    code
}
