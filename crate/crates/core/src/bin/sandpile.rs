use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sandpile::bench::{run_bench, BenchSpec, CSV_HEADER};
use sandpile::circuit::{
    compile_with_basis, gadget::{mutants, verify_macrocell}, gadget, parse_bits, select_basis, verify_gadget,
    CircuitInstance, MacroKind, TriggerStyle,
};
use sandpile::io::{parse_cell_arg, parse_config, parse_instance, parse_model, write_config, write_odometer};
use sandpile::model::Family;
use sandpile::parallel1d::{predict_1d_with, Predict1dOptions};
use sandpile::prediction::{solve_first_col, Answer, PredictionInstance, Variant};
use sandpile::render::{render_ppm, render_text};
use sandpile::selftest::{format_table, selftest};
use sandpile::simulation::{simulate, Lemma, Receipts};
use sandpile::{stabilize_with, Cell, Configuration, Error, Options, Policy, SandpileModel};

#[derive(Parser)]
#[command(name = "sandpile", version, about = "Abelian sandpile models: stabilization, prediction, circuits, simulations")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel phases.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ModelConfig {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stabilize a configuration and write the result and odometer.
    Stabilize {
        #[command(flatten)]
        mc: ModelConfig,
        /// parallel, seq-lexmin or seq-random (seeded by --seed).
        #[arg(long, default_value = "seq-lexmin")]
        policy: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        odometer: Option<PathBuf>,
        /// Assert conservation and the 2θ bound during the run.
        #[arg(long)]
        check: bool,
    },
    /// Solve a prediction problem.
    Predict {
        #[arg(long)]
        variant: String,
        #[command(flatten)]
        mc: ModelConfig,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        target: Option<Vec<String>>,
        #[arg(long = "add", num_args = 1.., allow_negative_numbers = true)]
        addition: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel 1D first-column prediction.
    Predict1d {
        #[command(flatten)]
        mc: ModelConfig,
        #[arg(long, allow_negative_numbers = true)]
        target: i64,
        /// Cross-check against sequential simulation.
        #[arg(long)]
        check: bool,
    },
    /// Lexicographically minimal avalanche process after adding a grain.
    Avalanche {
        #[command(flatten)]
        mc: ModelConfig,
        #[arg(long = "add", num_args = 1.., allow_negative_numbers = true)]
        addition: Vec<String>,
    },
    /// Compile a circuit into a configuration.
    Compile {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the input constants, e.g. 1011.
        #[arg(long)]
        assign: Option<String>,
        /// first-column or free.
        #[arg(long, default_value = "first-column")]
        trigger_style: String,
    },
    /// Certify every macrocell in a model.
    VerifyGadgets {
        #[arg(long)]
        model: PathBuf,
        /// Also run the mutation test.
        #[arg(long)]
        mutants: bool,
    },
    /// Evaluate a circuit directly.
    EvalCircuit {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        assign: Option<String>,
    },
    /// Build a simulation witness.
    Simulate {
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        u: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        k: u64,
        /// before-firing or total.
        #[arg(long, default_value = "before-firing")]
        receipts: String,
    },
    /// Time sequential against parallel prediction on generated instances (CSV).
    Bench {
        #[arg(long, default_value = "von-neumann")]
        family: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        r: i64,
        /// Comma separated sizes.
        #[arg(long, value_delimiter = ',', default_value = "64")]
        n: Vec<i64>,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump a configuration as a text grid or PPM image.
    Render {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        ppm: bool,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        /// Threshold for PPM shading; defaults to the largest count plus one.
        #[arg(long)]
        theta: Option<u64>,
        /// Grid corners as `x0,y0:x1,y1`.
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
    },
    /// Run the property suite and print a pass/fail table.
    Selftest,
}

enum Fail {
    Usage(String),
    Lib(Error),
    Breach(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn read(p: &Path) -> Res<String> {
    fs::read_to_string(p).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", p.display())))
}

fn write(p: &Path, data: &[u8]) -> Res<()> {
    fs::write(p, data).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", p.display())))
}

fn with_file<T>(p: &Path, r: sandpile::Result<T>) -> Res<T> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Fail::Lib(Error::Parse { line, msg: format!("{}: {msg}", p.display()) }),
        e => Fail::Lib(e),
    })
}

fn load_model(p: &Path) -> Res<SandpileModel> {
    with_file(p, parse_model(&read(p)?))
}

fn load_config(p: &Path) -> Res<Configuration> {
    with_file(p, parse_config(&read(p)?))
}

fn cell_arg(parts: &[String], d: usize) -> Res<Cell> {
    Ok(parse_cell_arg(&parts.join(" "), d)?)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvariantViolation(_)
        | Error::Watchdog { .. }
        | Error::GadgetDefect { .. }
        | Error::InfeasibleWindow
        | Error::Layout(_) => 4,
        _ => 3,
    }
}

struct Report {
    fields: Vec<(&'static str, String)>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report { fields: vec![("command", command.to_string())] }
    }

    fn add(&mut self, k: &'static str, v: impl ToString) {
        self.fields.push((k, v.to_string()));
    }

    fn instance(&mut self, m: &SandpileModel, c: &Configuration) {
        let n = c.bounding_box().map_or(0, |(lo, hi)| (0..lo.dim()).map(|i| hi[i] - lo[i] + 1).max().unwrap_or(0));
        self.add("d", m.dim());
        self.add("theta", m.threshold());
        self.add("r", m.radius());
        self.add("n", n);
        self.add("grains", c.total());
    }

    fn render(&self, f: Format) -> String {
        match f {
            Format::Text => self.fields.iter().map(|(k, v)| format!("{k}: {v}\n")).collect(),
            Format::Csv => {
                let keys: Vec<&str> = self.fields.iter().map(|(k, _)| *k).collect();
                let vals: Vec<&str> = self.fields.iter().map(|(_, v)| v.as_str()).collect();
                format!("{}\n{}\n", keys.join(","), vals.join(","))
            }
        }
    }
}

fn ms(t: Instant) -> String {
    format!("{:.3}", t.elapsed().as_secs_f64() * 1e3)
}

fn assignment(c: &CircuitInstance, bits: &Option<String>) -> Res<CircuitInstance> {
    match bits {
        Some(b) => Ok(c.with_assignment(&parse_bits(b)?)?),
        None => Ok(c.clone()),
    }
}

fn run(cli: Cli) -> Res<()> {
    let fmt = cli.format;
    let mut out = std::io::stdout().lock();
    let mut say = |s: &str| {
        let _ = out.write_all(s.as_bytes());
    };
    match cli.cmd {
        Cmd::Stabilize { mc, policy, out, odometer, check } => {
            let m = load_model(&mc.model)?;
            let c = load_config(&mc.config)?;
            let policy = Policy::parse(&policy, cli.seed)?;
            let mut opts = Options::new(policy);
            opts.check_invariants = check;
            let t = Instant::now();
            let s = stabilize_with(&m, &c, &opts)?;
            let mut rep = Report::new("stabilize");
            rep.instance(&m, &c);
            rep.add("policy", policy);
            rep.add("seed", cli.seed);
            rep.add("steps", s.steps);
            rep.add("topplings", s.topplings);
            rep.add("watchdog_bound", s.watchdog_bound);
            rep.add("odometer_max", s.odometer.max());
            rep.add("odometer_sum", s.odometer.total());
            rep.add("stabilize_ms", ms(t));
            if let Some(p) = &odometer {
                write(p, write_odometer(&s.odometer).as_bytes())?;
            }
            match &out {
                Some(p) => {
                    write(p, write_config(&s.configuration).as_bytes())?;
                    rep.add("output", p.display());
                    say(&rep.render(fmt));
                }
                None => {
                    say(&write_config(&s.configuration));
                    eprint!("{}", rep.render(fmt));
                }
            }
        }
        Cmd::Predict { variant, mc, target, addition, out } => {
            let model = load_model(&mc.model)?;
            let configuration = load_config(&mc.config)?;
            let d = model.dim();
            let variant: Variant = variant.parse()?;
            let target = target.map(|t| cell_arg(&t, d)).transpose()?;
            let addition = addition.map(|a| cell_arg(&a, d)).transpose()?;
            let inst = PredictionInstance { model, configuration, variant, target, addition };
            if let Err(Error::InvalidInstance(m)) = inst.validate() {
                if m.contains("takes") {
                    return Err(Fail::Usage(format!("{m} (use --target / --add)")));
                }
            }
            match inst.solve()? {
                Answer::Bool(b) => say(&format!("{b}\n")),
                Answer::Config(c) => match &out {
                    Some(p) => write(p, write_config(&c).as_bytes())?,
                    None => say(&write_config(&c)),
                },
            }
        }
        Cmd::Predict1d { mc, target, check } => {
            let m = load_model(&mc.model)?;
            let c = load_config(&mc.config)?;
            let opts = Predict1dOptions { threads: cli.threads, ..Default::default() };
            let t = Instant::now();
            let (ans, stats) = predict_1d_with(&m, &c, target, &opts)?;
            let par_ms = ms(t);
            if !check {
                say(&format!("{ans}\n"));
                return Ok(());
            }
            let t = Instant::now();
            let oracle = solve_first_col(&m, &c, &Cell::new(&[target]))?;
            let mut rep = Report::new("predict1d");
            rep.instance(&m, &c);
            rep.add("answer", ans);
            rep.add("oracle", oracle);
            rep.add("leaves", stats.leaves);
            rep.add("depth", stats.depth);
            rep.add("work", stats.work);
            rep.add("parallel_ms", par_ms);
            rep.add("sequential_ms", ms(t));
            say(&rep.render(fmt));
            if ans != oracle {
                return Err(Fail::Breach("parallel prediction disagrees with simulation".into()));
            }
        }
        Cmd::Avalanche { mc, addition } => {
            let m = load_model(&mc.model)?;
            let c = load_config(&mc.config)?;
            let y = cell_arg(&addition, m.dim())?;
            let p = sandpile::avalanche::avalanche(&m, &c, &y)?;
            let mut s = String::new();
            for x in &p.sequence {
                let coords: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                s.push_str(&coords.join(" "));
                s.push('\n');
            }
            s.push_str(&write_odometer(&p.odometer));
            say(&s);
        }
        Cmd::Compile { circuit, model, out, assign, trigger_style } => {
            let m = load_model(&model)?;
            let c = with_file(&circuit, CircuitInstance::parse(&read(&circuit)?))?;
            let c = assignment(&c, &assign)?;
            let style: TriggerStyle = trigger_style.parse()?;
            let t = Instant::now();
            let basis = select_basis(&m)?;
            let comp = compile_with_basis(&c, &m, &basis, style)?;
            write(&out, write_config(&comp.configuration).as_bytes())?;
            let mut rep = Report::new("compile");
            rep.instance(&m, &comp.configuration);
            rep.add("basis", &comp.basis);
            rep.add("trigger", &comp.trigger);
            rep.add("question", &comp.question);
            rep.add("macros", comp.macros);
            rep.add("crossings", comp.crossings);
            rep.add("expected", c.evaluate());
            rep.add("compile_ms", ms(t));
            rep.add("output", out.display());
            say(&rep.render(fmt));
        }
        Cmd::VerifyGadgets { model, mutants: run_mutants } => {
            let m = load_model(&model)?;
            let basis = select_basis(&m)?;
            let mut failed = 0;
            let mut s = format!("basis {basis}\n");
            for k in MacroKind::ALL {
                match verify_gadget(k, &m, &basis) {
                    Ok(r) => s.push_str(&format!("{k:<9} PASS  {} cells  {} runs\n", r.cells, r.runs)),
                    Err(e) => {
                        failed += 1;
                        s.push_str(&format!("{k:<9} FAIL  {e}\n"));
                    }
                }
            }
            if run_mutants {
                let all = mutants();
                let killed = all
                    .iter()
                    .filter(|&&(k, i, d)| verify_macrocell(&gadget::gadget(k), &m, &basis, Some((i, d))).is_err())
                    .count();
                s.push_str(&format!("mutants killed {killed}/{}\n", all.len()));
            }
            say(&s);
            if failed > 0 {
                return Err(Fail::Breach(format!("{failed} gadgets failed certification")));
            }
        }
        Cmd::EvalCircuit { circuit, assign } => {
            let c = with_file(&circuit, CircuitInstance::parse(&read(&circuit)?))?;
            say(&format!("{}\n", assignment(&c, &assign)?.evaluate()));
        }
        Cmd::Simulate { lemma, model, instance, u, k, receipts } => {
            let m = load_model(&model)?;
            let inst = with_file(&instance, parse_instance(&read(&instance)?))?.into();
            let lemma: Lemma = lemma.parse()?;
            let reading: Receipts = receipts.parse()?;
            let u = match u {
                Some(parts) => cell_arg(&parts, m.dim())?,
                None => default_u(&m, lemma, k)?,
            };
            let w = simulate(lemma, &m, &u, k, &inst, reading)?;
            say(&w.report());
            if lemma == Lemma::Extend && reading == Receipts::BeforeFiring && !w.preserved() {
                return Err(Fail::Breach("detector bit lost".into()));
            }
        }
        Cmd::Bench { family, d, r, n, density, seeds, out } => {
            let family: Family = family.parse()?;
            let spec = BenchSpec { family, dim: d, r, sizes: n, density, seeds, seed: cli.seed, threads: cli.threads };
            let rows = run_bench(&spec)?;
            let mut s = format!("{CSV_HEADER}\n");
            for row in &rows {
                s.push_str(&row.to_csv(&spec));
                s.push('\n');
            }
            match out {
                Some(p) => write(&p, s.as_bytes())?,
                None => say(&s),
            }
        }
        Cmd::Render { config, out, ppm, scale, theta, bounds } => {
            let c = load_config(&config)?;
            let bytes = if ppm {
                render_ppm(&c, theta.unwrap_or(c.max_count() + 1), scale)?
            } else {
                let b = bounds.map(|b| parse_bounds(&b, c.dim())).transpose()?;
                render_text(&c, b).into_bytes()
            };
            match out {
                Some(p) => write(&p, &bytes)?,
                None => {
                    let _ = std::io::stdout().write_all(&bytes);
                }
            }
        }
        Cmd::Selftest => {
            let rows = selftest(cli.seed);
            let s = match fmt {
                Format::Text => format_table(&rows),
                Format::Csv => {
                    let mut s = String::from("check,cases,passed,ms\n");
                    for r in &rows {
                        s.push_str(&format!("{},{},{},{}\n", r.name, r.cases, r.passed, r.millis));
                    }
                    s
                }
            };
            say(&s);
            if rows.iter().any(|r| !r.passed) {
                return Err(Fail::Breach("self-test failed".into()));
            }
        }
    }
    Ok(())
}

/// Smallest new vector for `extend`, else the first neighbour that can carry the change.
fn default_u(m: &SandpileModel, lemma: Lemma, k: u64) -> Res<Cell> {
    let found = match lemma {
        Lemma::Extend => {
            let d = m.dim();
            let mut cands: Vec<Cell> = Vec::new();
            let mut acc = vec![vec![]];
            for _ in 0..d {
                acc = acc.into_iter().flat_map(|p: Vec<i64>| (-2..=2).map(move |v| [p.clone(), vec![v]].concat())).collect();
            }
            cands.extend(acc.into_iter().map(Cell::from));
            cands.sort_by_key(|c| (c.norm_inf(), c.clone()));
            cands.into_iter().find(|c| !c.is_zero() && !m.contains(c))
        }
        Lemma::Increase => m.neighbors().first().map(|(v, _)| v.clone()),
        Lemma::Decrease => m.neighbors().iter().find(|(_, w)| *w > k).map(|(v, _)| v.clone()),
    };
    found.ok_or_else(|| Fail::Usage("no suitable --u; pass one explicitly".into()))
}

fn parse_bounds(s: &str, d: usize) -> Res<(Cell, Cell)> {
    let (a, b) = s.split_once(':').ok_or_else(|| Fail::Usage("bounds look like x0,y0:x1,y1".into()))?;
    Ok((parse_cell_arg(a, d)?, parse_cell_arg(b, d)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Fail::Breach(m)) => {
            eprintln!("invariant violated: {m}");
            ExitCode::from(4)
        }
    }
}
