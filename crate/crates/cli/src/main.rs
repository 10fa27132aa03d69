//! `gdistill`: command-line driver for dataset generation, featurization,
//! training, evaluation and the experiment harness.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphdistill::data::{
    generate_synthetic, load_dataset, parse_tu, save_dataset, split_indices, LabeledDataset, SplitSpec,
    SyntheticModel, CLASS, DIAMETER,
};
use graphdistill::experiments::{
    cross_validate, learning_curve, random_search, run_once, CvSpec, ExperimentConfig, LearningCurveSpec,
    SearchSpace, SplitMetric,
};
use graphdistill::nn::{evaluate, load_checkpoint, save_checkpoint, Example};
use graphdistill::spectral::{featurize_all, HksConfig};
use graphdistill::{Error, Exec};
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gdistill", version, about = "Multi-task graph learning with heat-kernel features")]
struct Cli {
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus labeled with density and diameter.
    Generate {
        #[arg(long, value_parser = ["er", "ba"])]
        model: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a TU benchmark directory into the dataset format.
    ParseTu {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one HKS histogram per graph.
    Hks {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 32)]
        bins: usize,
        #[arg(long, default_value_t = 32)]
        steps: usize,
        #[arg(long, default_value_t = (-3.0f64).exp())]
        tmin: f64,
        #[arg(long, default_value_t = 3.0f64.exp())]
        tmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model on an 8:1:1 split.
    Train {
        #[command(flatten)]
        tasks: TaskArgs,
        /// Keep the main-task label on only this many training graphs.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_metrics: PathBuf,
    },
    /// Score a saved model on every graph of a dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Single- vs multi-task test metric over a ladder of label budgets.
    LearningCurve {
        #[command(flatten)]
        tasks: TaskArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Number of seeds; seed i fixes split and initialization.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        /// Fill the wall_seconds column (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random hyperparameter search on the validation split.
    Search {
        #[command(flatten)]
        tasks: TaskArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also search the auxiliary weight over {0.1, 0.5, 1.0}.
        #[arg(long)]
        search_weights: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-fold cross-validation, optionally tuning on the first fold.
    Cv {
        #[command(flatten)]
        tasks: TaskArgs,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random-search trials on fold 1 (0 disables tuning).
        #[arg(long, default_value_t = 0)]
        search_trials: usize,
        #[arg(long)]
        search_weights: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TaskArgs {
    #[arg(long)]
    data: PathBuf,
    /// Main task; defaults to `class` if present, else `diameter`.
    #[arg(long)]
    main: Option<String>,
    /// Auxiliary tasks; defaults to every other task in the dataset.
    #[arg(long, value_delimiter = ',')]
    aux: Option<Vec<String>>,
    /// Experiment configuration (JSON); omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

struct Resolved {
    ds: LabeledDataset,
    main: String,
    aux: Vec<String>,
    aux_given: bool,
    cfg: ExperimentConfig,
}

impl TaskArgs {
    fn resolve(&self) -> Result<Resolved, Error> {
        let ds = load_dataset(&self.data)?;
        let main = match &self.main {
            Some(m) => m.clone(),
            None if ds.task(CLASS).is_some() => CLASS.into(),
            None => DIAMETER.into(),
        };
        ds.require_task(&main)?;
        let aux = match &self.aux {
            Some(a) => a.iter().filter(|s| !s.is_empty()).cloned().collect(),
            None => ds.tasks.iter().map(|t| t.name.clone()).filter(|n| *n != main).collect(),
        };
        let cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        log::info!("main task {main}, auxiliary {aux:?}");
        Ok(Resolved {
            ds,
            main,
            aux,
            aux_given: self.aux.is_some(),
            cfg,
        })
    }
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    write(path, &text)
}

/// `out` receives the CSV; the JSON goes next to it. An `out` ending in
/// `.json` swaps the roles.
fn csv_and_json(out: &Path) -> (PathBuf, PathBuf) {
    if out.extension().is_some_and(|e| e == "json") {
        (out.with_extension("csv"), out.to_path_buf())
    } else {
        (out.to_path_buf(), out.with_extension("json"))
    }
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn metrics_csv(metrics: &[SplitMetric]) -> String {
    let mut out = String::from("split,task,metric_name,metric_value,count\n");
    for m in metrics {
        writeln!(out, "{},{},{},{},{}", m.split, m.task, m.metric.name(), m.value, m.count).unwrap();
    }
    out
}

fn search_space(trials: usize, weights: bool, r: &Resolved) -> SearchSpace {
    let mut space = SearchSpace {
        num_trials: trials,
        ..SearchSpace::default()
    };
    // Benchmark data: let the search pick one structural auxiliary task.
    if !r.aux_given && r.main == CLASS {
        space.aux_choices = r.aux.clone();
    }
    if weights {
        space.aux_weights = vec![0.1, 0.5, 1.0];
    }
    space
}

fn run(cli: Cli) -> Result<(), Error> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match cli.command {
        Command::Generate { model, count, seed, out } => {
            let model: SyntheticModel = model.parse()?;
            let ds = generate_synthetic(model, count, seed, exec)?;
            save_dataset(&ds, &out)?;
            log::info!("wrote {} graphs to {}", ds.len(), out.display());
        }
        Command::ParseTu { dir, name, out } => {
            let ds = parse_tu(&dir, &name)?;
            save_dataset(&ds, &out)?;
            log::info!("wrote {} graphs to {}", ds.len(), out.display());
        }
        Command::Hks {
            input,
            bins,
            steps,
            tmin,
            tmax,
            out,
        } => {
            let ds = load_dataset(&input)?;
            let cfg = HksConfig {
                num_steps: steps,
                t_min: tmin,
                t_max: tmax,
                num_bins: bins,
            };
            let hists = featurize_all(&ds.graphs(), &cfg, exec)?;
            let mut text = json!({"format": 1, "hks": cfg, "count": hists.len()}).to_string();
            text.push('\n');
            for h in &hists {
                text.push_str(&serde_json::to_string(h).map_err(|e| Error::Config(e.to_string()))?);
                text.push('\n');
            }
            write(&out, &text)?;
        }
        Command::Train {
            tasks,
            budget,
            seed,
            out_model,
            out_metrics,
        } => {
            let r = tasks.resolve()?;
            let split = split_indices(r.ds.len(), &SplitSpec::with_seed(seed))?;
            let features = r.ds.featurize(&r.cfg.hks, exec)?;
            let run = run_once(&r.ds, &features, &split, budget, &r.main, &r.aux, &r.cfg, seed, exec)?;
            save_checkpoint(&run.net, Some(&r.cfg.hks), &out_model)?;
            let (csv, json) = csv_and_json(&out_metrics);
            write(&csv, &metrics_csv(&run.record.metrics))?;
            write_json(&json, &run.record)?;
            if let Some(m) = run.record.main_metric("test") {
                println!("test {} {} = {}", m.task, m.metric.name(), m.value);
            }
        }
        Command::Evaluate { model, data, out } => {
            let (net, hks) = load_checkpoint(&model)?;
            let hks = hks.ok_or_else(|| Error::Data(format!("{} carries no HKS configuration", model.display())))?;
            let ds = load_dataset(&data)?;
            let features = ds.featurize(&hks, exec)?;
            let examples: Vec<Example> = ds.to_examples(&features, net.tasks())?;
            let metrics: Vec<SplitMetric> = evaluate(&net, &examples, exec)?
                .into_iter()
                .map(|m| SplitMetric {
                    split: "all".into(),
                    task: m.task,
                    metric: m.metric,
                    value: m.value,
                    count: m.count,
                })
                .collect();
            let (csv, json) = csv_and_json(&out);
            write(&csv, &metrics_csv(&metrics))?;
            write_json(&json, &metrics)?;
        }
        Command::LearningCurve {
            tasks,
            sizes,
            seeds,
            timing,
            out,
        } => {
            let r = tasks.resolve()?;
            let aux: Vec<&str> = r.aux.iter().map(String::as_str).collect();
            let spec = LearningCurveSpec::new(&r.main, &aux, sizes, seeds);
            let table = learning_curve(&r.ds, &spec, &r.cfg, exec)?;
            let (csv, json) = csv_and_json(&out);
            write(&csv, &table.to_csv(timing))?;
            write(&sibling(&csv, "_summary", "csv"), &table.summary_csv())?;
            write_json(&json, &json!({"config": r.cfg, "table": table}))?;
            print!("{}", table.summary_csv());
            let failed = table.rows.iter().filter(|row| row.error.is_some()).count();
            if failed > 0 {
                log::warn!("{failed} of {} cells failed; see {}", table.rows.len(), json.display());
            }
        }
        Command::Search {
            tasks,
            trials,
            seed,
            search_weights,
            out,
        } => {
            let r = tasks.resolve()?;
            let split = split_indices(r.ds.len(), &SplitSpec::with_seed(seed))?;
            let space = search_space(trials, search_weights, &r);
            let report = random_search(&r.ds, &split, &r.main, &r.aux, &r.cfg, &space, seed, exec)?;
            let mut text = String::from(
                "trial,steps,bins,t_min,t_max,kernel1,kernel2,aux_tasks,aux_weight,metric_name,val_metric,test_metric\n",
            );
            for t in &report.trials {
                let c = &t.config;
                let (name, val, test) = match &t.record {
                    Some(rec) => {
                        let v = rec.main_metric("val").unwrap();
                        let te = rec.main_metric("test").unwrap();
                        (v.metric.name(), v.value.to_string(), te.value.to_string())
                    }
                    None => ("", String::new(), String::new()),
                };
                writeln!(
                    text,
                    "{},{},{},{},{},{},{},{},{},{name},{val},{test}",
                    t.trial,
                    c.hks.num_steps,
                    c.hks.num_bins,
                    c.hks.t_min,
                    c.hks.t_max,
                    c.kernel1,
                    c.kernel2,
                    t.aux_tasks.join(";"),
                    c.aux_weight
                )
                .unwrap();
            }
            let (csv, json) = csv_and_json(&out);
            write(&csv, &text)?;
            write_json(&json, &report)?;
            let best = report.best();
            write_json(&sibling(&csv, "_best", "json"), &best.config)?;
            println!("best trial {} (aux {:?})", best.trial, best.aux_tasks);
        }
        Command::Cv {
            tasks,
            folds,
            seed,
            search_trials,
            search_weights,
            out,
        } => {
            let r = tasks.resolve()?;
            let spec = CvSpec {
                folds,
                seed,
                main_task: r.main.clone(),
                aux_tasks: r.aux.clone(),
                search: (search_trials > 0).then(|| search_space(search_trials, search_weights, &r)),
            };
            let report = cross_validate(&r.ds, &spec, &r.cfg, exec)?;
            let mut text = String::from("fold,train_size,val_size,test_size,metric_name,metric_value,best_epoch\n");
            for f in &report.folds {
                writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    f.fold,
                    f.train_size,
                    f.val_size,
                    f.test_size,
                    report.metric.name(),
                    f.value,
                    f.best_epoch
                )
                .unwrap();
            }
            let (csv, json) = csv_and_json(&out);
            write(&csv, &text)?;
            write_json(&json, &report)?;
            println!(
                "{} {} = {} ± {}",
                r.main,
                report.metric.name(),
                report.stats.mean,
                report.stats.stderr
            );
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("GD_THREADS") else { return Ok(()) };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("GD_THREADS must be a positive integer, got {value:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { EXIT_NUMERIC } else { EXIT_DATA })
        }
    }
}
