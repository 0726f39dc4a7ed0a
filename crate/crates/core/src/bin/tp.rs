use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tplab::metrics::Granularity;
use tplab::mutation::MatrixMode;
use tplab::pipeline::{
    analyze_corpus, cmd_correlate, cmd_mutate, cmd_predict, cmd_report, cmd_run, project_out, time_stages,
    write_timing_csv, Corpus, PipelineError, RunOptions, Scenario, Scope, SmoteFlag,
};

#[derive(Parser)]
#[command(name = "tp", version, about = "Stack distance and pseudo-tested method analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run test suites with recording; writes traces.csv and tests.csv.
    Run(Common),
    /// Build mutation matrices; writes matrix.csv, verdicts.csv and timing.csv.
    Mutate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "full")]
        mode: MatrixMode,
    },
    /// Datasets, buckets.csv and correlation.csv.
    Correlate(Common),
    /// Prediction scenarios; writes eval_report.json and importance.csv.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_granularity)]
        granularity: Option<Granularity>,
        #[arg(long, value_parser = parse_scope)]
        scope: Option<Scope>,
        #[arg(long, value_parser = parse_smote)]
        smote: Option<SmoteFlag>,
    },
    /// Summary table per project.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// A single project directory holding project.json.
    #[arg(long, conflicts_with = "corpus")]
    project: Option<PathBuf>,
    /// A corpus directory holding corpus.json.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    step_budget: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_granularity(s: &str) -> Result<Granularity, String> {
    match s {
        "method" => Ok(Granularity::Method),
        "pair" => Ok(Granularity::Pair),
        _ => Err(format!("expected method or pair, got `{s}`")),
    }
}

fn parse_scope(s: &str) -> Result<Scope, String> {
    match s {
        "within" => Ok(Scope::Within),
        "cross" => Ok(Scope::Cross),
        _ => Err(format!("expected within or cross, got `{s}`")),
    }
}

fn parse_smote(s: &str) -> Result<SmoteFlag, String> {
    match s {
        "on" => Ok(SmoteFlag::On),
        "off" => Ok(SmoteFlag::Off),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

impl Common {
    fn load(&self) -> Result<(Corpus, RunOptions), PipelineError> {
        let corpus = match (&self.project, &self.corpus) {
            (Some(p), _) => Corpus::single(p)?,
            (None, Some(c)) => Corpus::load(c)?,
            (None, None) => return Err(PipelineError::Input("pass --project or --corpus".into())),
        };
        let mut options = RunOptions::from_settings(&corpus.settings);
        options.step_budget = self.step_budget.unwrap_or(options.step_budget);
        options.seed = self.seed.unwrap_or(options.seed);
        options.workers = self.workers;
        Ok((corpus, options))
    }
}

fn execute(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Run(c) => {
            let (corpus, options) = c.load()?;
            let multi = corpus.projects.len() > 1;
            for p in &corpus.projects {
                let rows = cmd_run(&p.program, &options, &project_out(&c.out, &p.manifest.project_id, multi))?;
                if p.program.tests.is_empty() {
                    eprintln!("warning: {} has no tests", p.manifest.project_id);
                }
                println!("{}: {rows} trace rows", p.manifest.project_id);
            }
        }
        Command::Mutate { common: c, mode } => {
            let (corpus, options) = c.load()?;
            let multi = corpus.projects.len() > 1;
            for p in &corpus.projects {
                let dir = project_out(&c.out, &p.manifest.project_id, multi);
                let matrix = cmd_mutate(&p.program, mode, &options, &dir)?;
                let timing = time_stages(&p.program, &options, 1)?;
                write_timing_csv(&timing, &dir.join("timing.csv"))?;
                println!("{}: {} mutants, {} matrix rows", p.manifest.project_id, matrix.mutants.len(), matrix.rows.len());
                for (stage, d) in timing.stages() {
                    println!("  {stage:<13} {:>10.3} ms", d.as_secs_f64() * 1e3);
                }
            }
        }
        Command::Correlate(c) => {
            let (corpus, options) = c.load()?;
            cmd_correlate(&analyze_corpus(&corpus, &options)?, &c.out)?;
            println!("wrote {}", c.out.join("correlation.csv").display());
        }
        Command::Predict { common: c, granularity, scope, smote } => {
            let (corpus, options) = c.load()?;
            let analyses = analyze_corpus(&corpus, &options)?;
            let scenarios = Scenario::grid(granularity, scope, smote);
            let doc = cmd_predict(&analyses, &scenarios, &corpus.settings, options.seed, &c.out)?;
            for s in &doc.scenarios {
                let w = &s.pooled.weighted;
                println!(
                    "{:<26} precision {:.3}  recall {:.3}  f {:.3}  ineffective recall {:.3}",
                    s.scenario.to_string(),
                    w.precision,
                    w.recall,
                    w.f_score,
                    s.pooled.ineffective.recall
                );
            }
        }
        Command::Report(c) => {
            let (corpus, options) = c.load()?;
            print!("{}", cmd_report(&analyze_corpus(&corpus, &options)?, &c.out)?);
        }
    }
    Ok(())
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Run(c) | Command::Correlate(c) | Command::Report(c) => c,
            Command::Mutate { common, .. } | Command::Predict { common, .. } => common,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command.common().workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(PipelineError::Input(format!("--workers: {e}"))),
        },
        None => execute(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
