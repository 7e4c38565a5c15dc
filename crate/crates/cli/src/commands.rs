use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use fairssat::distribution::{RawTable, Schema};
use fairssat::encoders::{EncodeOptions, Encoding, ModelSpec};
use fairssat::ssat::{evaluate, negate_tseitin, sdimacs};
use fairssat::synthetic;
use fairssat::verifier::{
    self, FairnessReport, Mode, PipelineReport, Problem, SampleSizeQuery, VerifyOptions,
};

use crate::{Command, Dataset, EncodeArgs, InputArgs, ModeArg, SynthArgs, VerifyArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fairssat::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(
        "learning and enumeration disagree: max {learn_max} vs {enum_max}, min {learn_min} vs {enum_min} (tolerance {tolerance})"
    )]
    Mismatch {
        learn_max: f64,
        enum_max: f64,
        learn_min: f64,
        enum_min: f64,
        tolerance: f64,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Mismatch { .. } | CliError::Core(fairssat::Error::Contract(_)) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "stdout".into(),
                    source,
                })
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Verify(args) => verify(args),
        Command::Solve { path } => solve(&path),
        Command::Encode(args) => encode(args),
        Command::Samplesize {
            n,
            m,
            epsilon0,
            delta,
        } => {
            let k = verifier::required_sample_size(SampleSizeQuery {
                n,
                m,
                epsilon0,
                delta,
            })?;
            println!("{k}");
            Ok(())
        }
        Command::Synth(args) => synth(args),
    }
}

fn load(input: &InputArgs) -> Result<Problem> {
    let schema = Schema::from_json(&read(&input.schema)?)?;
    let table = RawTable::from_path(&input.data)?;
    let spec = ModelSpec::from_json(&read(&input.model)?)?;
    let options = EncodeOptions {
        scale: input.scale,
        lambda: input.lambda,
    };
    Ok(Problem::from_sources(
        &schema, &table, &spec, input.bins, options,
    )?)
}

fn verify(args: VerifyArgs) -> Result<()> {
    let problem = load(&args.input)?;
    let mode = match args.mode {
        ModeArg::Enum => Mode::Enum,
        ModeArg::Learn => Mode::Learn,
        ModeArg::Both => Mode::Both,
    };
    let mut options = VerifyOptions {
        metrics: args.metrics.parse()?,
        bin_implications: args.bin_implications,
        timings: args.timings,
        epsilon0: args.epsilon0,
        delta: args.delta,
        ..VerifyOptions::default()
    };
    let report = match args.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(1) => {
            options.parallel = false;
            verifier::verify(&problem, mode, &options)?
        }
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| verifier::verify(&problem, mode, &options))?
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            log::warn!("built without parallel support; --jobs ignored");
            options.parallel = false;
            verifier::verify(&problem, mode, &options)?
        }
        None => verifier::verify(&problem, mode, &options)?,
    };
    let mut json = report.to_json();
    json.push('\n');
    emit(args.out.as_deref(), &json)?;
    eprint!("{}", summary(&report));
    match report.cross_check {
        Some(c) if !c.agree => Err(CliError::Mismatch {
            learn_max: c.learn_max,
            enum_max: c.enum_max,
            learn_min: c.learn_min,
            enum_min: c.enum_min,
            tolerance: c.tolerance,
        }),
        _ => Ok(()),
    }
}

fn summary(report: &FairnessReport) -> String {
    let mut out = String::new();
    let pipeline = |out: &mut String, name: &str, r: &PipelineReport| {
        let _ = writeln!(out, "{name} ({} probabilities)", r.probabilities);
        let _ = writeln!(
            out,
            "  most favored   {:.4}  {}",
            r.favored.ppv, r.favored.group
        );
        let _ = writeln!(
            out,
            "  least favored  {:.4}  {}",
            r.unfavored.ppv, r.unfavored.group
        );
        if let Some(di) = r.metrics.di {
            let _ = writeln!(out, "  disparate impact    {di:.4}");
        }
        if let Some(sp) = r.metrics.sp {
            let _ = writeln!(out, "  statistical parity  {sp:.4}");
        }
        if let Some(eo) = r.metrics.eo {
            let _ = writeln!(
                out,
                "  equalized odds      {:.4} (tpr gap {:.4}, fpr gap {:.4})",
                eo.eo, eo.tpr_gap, eo.fpr_gap
            );
        }
        if let Some(g) = &r.guideline {
            if g.rows < g.recommended_rows as usize {
                let _ = writeln!(
                    out,
                    "  note: {} rows; about {} suggested for estimates within factor {} at confidence {}",
                    g.rows,
                    g.recommended_rows,
                    g.epsilon0,
                    1.0 - g.delta
                );
            }
        }
        for w in &r.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
    };
    if let Some(r) = &report.single {
        let name = match report.mode {
            Mode::Learn => "learn",
            _ => "enum",
        };
        pipeline(&mut out, name, r);
    }
    if let Some(r) = &report.enumeration {
        pipeline(&mut out, "enum", r);
    }
    if let Some(r) = &report.learning {
        pipeline(&mut out, "learn", r);
    }
    if let Some(c) = &report.cross_check {
        let verdict = if c.agree { "agree" } else { "DISAGREE" };
        let _ = writeln!(
            out,
            "cross-check: learn ({:.9}, {:.9}) vs unconditioned enum ({:.9}, {:.9}): {verdict}",
            c.learn_min, c.learn_max, c.enum_min, c.enum_max
        );
    }
    out
}

fn solve(path: &Path) -> Result<()> {
    let formula = sdimacs::parse(&read(path)?)?;
    let result = evaluate(&formula)?;
    let mut out = format!("s {:.9}\n", result.probability);
    if !result.witness.is_empty() {
        out.push('v');
        for l in result.witness.lits() {
            let _ = write!(out, " {l}");
        }
        out.push_str(" 0\n");
    }
    let s = result.stats;
    log::info!(
        "{} decisions, {} cache hits, {} cache entries",
        s.decisions,
        s.cache_hits,
        s.cache_entries
    );
    emit(None, &out)
}

fn section(out: &mut String, title: &str, enc: &Encoding) {
    let _ = writeln!(out, "c {title}");
    if !enc.aux.is_empty() {
        let _ = write!(out, "c auxiliary");
        for v in &enc.aux {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out.push_str(&sdimacs::write_cnf(&enc.cnf));
}

fn encode(args: EncodeArgs) -> Result<()> {
    let problem = load(&args.input)?;
    let mut out = String::from("c variables\n");
    for line in problem.map.legend() {
        let _ = writeln!(out, "c {line}");
    }
    section(&mut out, "positive class", &problem.model.positive);
    match &problem.model.negative {
        Some(neg) => section(&mut out, "negative class", neg),
        None => {
            let neg = negate_tseitin(&problem.model.positive.cnf);
            let enc = Encoding {
                cnf: neg.cnf,
                aux: neg.aux,
            };
            section(&mut out, "negative class (Tseitin)", &enc);
        }
    }
    emit(args.out.as_deref(), &out)
}

fn synth(args: SynthArgs) -> Result<()> {
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let (table, schema, model) = match args.dataset {
        Dataset::FitnessIncome => (
            synthetic::fitness_income_data(args.rows, args.seed),
            synthetic::FITNESS_INCOME_SCHEMA,
            synthetic::FITNESS_INCOME_TREE,
        ),
        Dataset::AdultLike => (
            synthetic::adult_like_data(args.rows, args.seed),
            synthetic::ADULT_SCHEMA,
            synthetic::ADULT_TREE,
        ),
    };
    write(&dir.join("data.csv"), &table.to_csv())?;
    write(&dir.join("schema.json"), schema)?;
    write(&dir.join("model.json"), model)?;
    eprintln!("wrote {} rows to {}", table.len(), dir.display());
    Ok(())
}
