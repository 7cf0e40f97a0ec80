//! The three commands. Every output of one invocation lands in
//! `<root>/<name>-<digest8>/`; `manifest.json` is written last.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use moo_core::{evolve, History};
use snnfit_core::analysis::{
    export_front, extract_front, front_plot_svg, front_summary, import_population_csv, population_csv,
    FrontFormat, FrontMetadata, FrontSource, FrontSummary, ParetoFront, DEFAULT_EPSILON,
};
use snnfit_core::network::build_network;
use snnfit_core::objectives::{experiment_grid, SnnProblem, StudySpec};
use snnfit_core::seed::{mix_seed, noise_seed_for};
use snnfit_core::simulator::{
    export_raster, export_rate_series, instantaneous_rates, mean_rates, render_raster_svg, run_simulation_with,
    SimOptions,
};

use crate::config::ExperimentConfig;
use crate::manifest::{unix_now, Manifest, PlotEntry, RunEntry, Status};
use crate::CliError;

/// Environment variable naming the default run root.
pub const RUNS_ENV: &str = "SNNFIT_RUNS";

const GA_SEED_TAG: u64 = 0x6761;

pub fn default_root() -> PathBuf {
    std::env::var_os(RUNS_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

pub fn run_dir(root: &Path, config: &ExperimentConfig) -> PathBuf {
    root.join(format!("{}-{}", config.name, &config.digest()[..8]))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn create_dirs(dir: &Path, subdirs: &[&str]) -> Result<(), CliError> {
    for sub in subdirs {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| io_err(&p, e))?;
    }
    // a stale manifest would claim outputs from an earlier invocation
    let stale = dir.join(crate::manifest::MANIFEST_FILE);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| io_err(&stale, e))?;
    }
    Ok(())
}

/// Runs `f` on a rayon pool of `jobs` threads, or the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Config(format!("--jobs {n}: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// One simulation of the genome in `config.simulate`, seeded by the first
/// configured seed.
pub fn simulate(config: &ExperimentConfig, root: &Path, jobs: Option<usize>) -> Result<SimulateOutcome, CliError> {
    config.validate()?;
    let dir = run_dir(root, config);
    create_dirs(&dir, &["", "plots", "logs"])?;
    let mut manifest = Manifest::new("simulate", config);

    let sim = &config.simulate;
    let net_cfg = &config.network;
    let seed = config.seeds[0];
    let genome = sim.genome();
    let net = build_network(&genome, seed, net_cfg.n_exc, net_cfg.n_inh)?;
    let options = SimOptions {
        noise: sim.noise,
        parallel: jobs.unwrap_or_else(rayon::current_num_threads) > 1,
        probes: sim.probes.clone(),
    };
    let out = with_jobs(jobs, || {
        run_simulation_with(&net, &genome, net_cfg.duration, noise_seed_for(seed), &options)
    })??;
    let record = out.record;

    let raster = dir.join("raster.csv");
    export_raster(&record, &raster)?;
    manifest.files.push("raster.csv".into());
    let rates = dir.join("rates.csv");
    export_rate_series(&instantaneous_rates(&record, sim.bin)?, &rates)?;
    manifest.files.push("rates.csv".into());

    let summary = mean_rates(&record);
    let summary_text = serde_json::to_string_pretty(&serde_json::json!({
        "spikes": record.events.len(),
        "duration_ms": record.duration,
        "r_exc": summary.r_exc,
        "r_inh": summary.r_inh,
        "r_all": summary.r_all,
    }))
    .expect("summary serializes");
    write_file(&dir.join("summary.json"), &(summary_text + "\n"))?;
    manifest.files.push("summary.json".into());

    if sim.svg {
        render_raster_svg(&record, &dir.join("plots/raster.svg"))?;
        manifest.plots.push(PlotEntry {
            file: "plots/raster.svg".into(),
            sources: vec!["raster.csv".into()],
        });
    }
    if sim.dump_weights {
        net.dump_weights_csv(&dir.join("weights.csv"))?;
        manifest.files.push("weights.csv".into());
    }
    if !out.probes.is_empty() {
        let mut text = String::from("tick");
        for p in &out.probes {
            let _ = write!(text, ",v{}", p.neuron);
        }
        text.push('\n');
        for t in 0..record.duration {
            let _ = write!(text, "{t}");
            for p in &out.probes {
                let _ = write!(text, ",{}", p.v[t]);
            }
            text.push('\n');
        }
        write_file(&dir.join("probes.csv"), &text)?;
        manifest.files.push("probes.csv".into());
    }
    log::info!(
        "simulated {} ms: r_exc {:.3} Hz, r_inh {:.3} Hz, r_all {:.3} Hz",
        record.duration,
        summary.r_exc,
        summary.r_inh,
        summary.r_all
    );

    manifest.complete = true;
    manifest.write(&dir)?;
    Ok(SimulateOutcome { dir, manifest })
}

/// A study under one seed, ready to run.
#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub id: String,
    pub family: String,
    pub seed: u64,
    pub ga_seed: u64,
    pub spec: StudySpec,
}

/// Expands every study family under every seed.
pub fn plan_runs(config: &ExperimentConfig) -> Result<Vec<PlannedRun>, CliError> {
    let mut runs = Vec::new();
    for &seed in &config.seeds {
        for family in &config.studies {
            for spec in experiment_grid(family, seed)? {
                runs.push(PlannedRun {
                    id: format!("{}-s{seed}", spec.id),
                    family: family.name.clone(),
                    seed,
                    ga_seed: mix_seed(&[spec.seed, GA_SEED_TAG]),
                    spec,
                });
            }
        }
    }
    Ok(runs)
}

/// Runs the GA for one planned study.
pub fn run_study(config: &ExperimentConfig, run: &PlannedRun) -> Result<History, CliError> {
    let problem = SnnProblem::new(run.spec.clone(), config.network.clone())?;
    let ga = config.ga.to_config(run.spec.genes.clone());
    evolve(&problem, &ga, run.ga_seed).map_err(|e| CliError::Numerical(format!("{}: {e}", run.id)))
}

fn front_source(run: &RunEntry, generation: usize) -> FrontSource {
    FrontSource {
        experiment: run.id.clone(),
        generation,
        gene_names: run.spec.gene_names(),
        objective_names: run.spec.mode.objective_names(),
    }
}

fn front_metadata(manifest: &Manifest, run: &RunEntry) -> FrontMetadata {
    FrontMetadata {
        seeds: vec![run.seed, run.spec.seed, run.ga_seed],
        config_digest: manifest.config_digest.clone(),
        created_unix: Some(unix_now()),
    }
}

fn generation_line(run: &str, generation: usize, front: &ParetoFront, summary: &FrontSummary) -> String {
    let mins: Vec<String> = summary.objectives.iter().map(|o| format!("{}={:.4}", o.name, o.min)).collect();
    format!(
        "{run} generation {generation}: front {} members, balanced error {:.4}, minima {}",
        front.len(),
        summary.balanced_error,
        mins.join(" ")
    )
}

/// Writes front CSV/JSON and summary for `population` into `fronts/`.
fn write_front(
    dir: &Path,
    manifest: &Manifest,
    run: &RunEntry,
    generation: usize,
    population: &[moo_core::Individual],
    stem: &str,
) -> Result<(ParetoFront, FrontSummary), CliError> {
    let front = extract_front(population, front_source(run, generation), front_metadata(manifest, run))?;
    let summary = front_summary(&front, DEFAULT_EPSILON)?;
    export_front(&front, &dir.join(format!("fronts/{stem}.csv")), FrontFormat::Csv)?;
    export_front(&front, &dir.join(format!("fronts/{stem}.json")), FrontFormat::Json)?;
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_file(&dir.join(format!("fronts/{stem}.summary.json")), &text)?;
    Ok((front, summary))
}

/// Writes one SVG per (family, seed) group of runs.
fn write_plots(
    dir: &Path,
    manifest: &Manifest,
    fronts: &[(String, ParetoFront, String)],
    suffix: &str,
) -> Result<Vec<PlotEntry>, CliError> {
    let mut groups: Vec<(String, Vec<&ParetoFront>, Vec<String>)> = Vec::new();
    for (run_id, front, source) in fronts {
        let run = manifest.runs.iter().find(|r| &r.id == run_id).expect("front of a listed run");
        let key = format!("{}-s{}", run.family, run.seed);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => {
                g.1.push(front);
                g.2.push(source.clone());
            }
            None => groups.push((key, vec![front], vec![source.clone()])),
        }
    }
    let mut plots = Vec::new();
    for (key, group, sources) in groups {
        let owned: Vec<ParetoFront> = group.into_iter().cloned().collect();
        let mut svg = front_plot_svg(&owned, &key)?;
        let mut meta = String::from("<metadata class=\"sources\">\n");
        for s in &sources {
            let _ = writeln!(meta, "<source href=\"{s}\"/>");
        }
        meta.push_str("</metadata>\n</svg>\n");
        svg.truncate(svg.rfind("</svg>").expect("svg closes"));
        svg.push_str(&meta);
        let file = format!("plots/{key}{suffix}.svg");
        write_file(&dir.join(&file), &svg)?;
        plots.push(PlotEntry { file, sources });
    }
    Ok(plots)
}

pub struct OptimizeOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub histories: Vec<(String, History)>,
}

/// Every study of the config under every seed. Failed runs are recorded
/// and the remaining ones still execute.
pub fn optimize(config: &ExperimentConfig, root: &Path, jobs: Option<usize>) -> Result<OptimizeOutcome, CliError> {
    config.validate()?;
    if config.studies.is_empty() {
        return Err(CliError::Config("no [[study]] tables in config".into()));
    }
    let planned = plan_runs(config)?;
    let dir = run_dir(root, config);
    create_dirs(&dir, &["", "populations", "fronts", "plots", "logs"])?;
    let mut manifest = Manifest::new("optimize", config);
    let mut histories = Vec::new();
    let mut fronts = Vec::new();

    for run in &planned {
        log::info!("{}: starting ({} x {} generations)", run.id, config.ga.population_size, config.ga.generations);
        let mut entry = RunEntry {
            id: run.id.clone(),
            family: run.family.clone(),
            seed: run.seed,
            ga_seed: run.ga_seed,
            spec: run.spec.clone(),
            status: Status::Ok,
            error: None,
            populations: Vec::new(),
            front_csv: None,
            front_json: None,
            summary: None,
            log: None,
        };
        let history = match with_jobs(jobs, || run_study(config, run))? {
            Ok(h) => h,
            Err(e) => {
                log::error!("{}: {e}", run.id);
                entry.status = Status::Failed;
                entry.error = Some(e.to_string());
                manifest.runs.push(entry);
                continue;
            }
        };

        let pop_dir = format!("populations/{}", run.id);
        fs::create_dir_all(dir.join(&pop_dir)).map_err(|e| io_err(&dir.join(&pop_dir), e))?;
        let genes = run.spec.gene_names();
        let objectives = run.spec.mode.objective_names();
        let mut log_text = String::new();
        for gen in &history.generations {
            let file = format!("{pop_dir}/gen_{:03}.csv", gen.index);
            write_file(&dir.join(&file), &population_csv(gen, &genes, &objectives))?;
            entry.populations.push(file);
            let f = extract_front(&gen.population, front_source(&entry, gen.index), FrontMetadata::default())?;
            let s = front_summary(&f, DEFAULT_EPSILON)?;
            let line = generation_line(&run.id, gen.index, &f, &s);
            log::info!("{line}");
            log_text.push_str(&line);
            log_text.push('\n');
        }
        let log_file = format!("logs/{}.log", run.id);
        write_file(&dir.join(&log_file), &log_text)?;
        entry.log = Some(log_file);

        let last = history.last();
        let (front, _) = write_front(&dir, &manifest, &entry, last.index, &last.population, &run.id)?;
        entry.front_csv = Some(format!("fronts/{}.csv", run.id));
        entry.front_json = Some(format!("fronts/{}.json", run.id));
        entry.summary = Some(format!("fronts/{}.summary.json", run.id));
        fronts.push((run.id.clone(), front, entry.populations.last().cloned().unwrap_or_default()));
        manifest.runs.push(entry);
        histories.push((run.id.clone(), history));
    }

    manifest.plots = write_plots(&dir, &manifest, &fronts, "")?;
    let failed = manifest.runs.iter().filter(|r| r.status == Status::Failed).count();
    manifest.complete = failed == 0;
    manifest.write(&dir)?;
    if failed > 0 {
        return Err(CliError::Partial(format!(
            "{failed} of {} runs failed; see {}",
            manifest.runs.len(),
            dir.join(crate::manifest::MANIFEST_FILE).display()
        )));
    }
    Ok(OptimizeOutcome {
        dir,
        manifest,
        histories,
    })
}

/// Rebuilds fronts, summaries and plots from stored populations.
/// Without `generation` the final generation of each run is used and the
/// files produced by `optimize` are rewritten in place.
pub fn front(dir: &Path, generation: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let manifest = Manifest::read(dir)?;
    if manifest.command != "optimize" {
        return Err(CliError::Config(format!(
            "{} holds a {} run, not an optimization",
            dir.display(),
            manifest.command
        )));
    }
    let mut written = Vec::new();
    let mut fronts = Vec::new();
    for run in manifest.runs.iter().filter(|r| r.status == Status::Ok) {
        let file = match generation {
            None => run.populations.last().cloned(),
            Some(g) => run.populations.get(g).cloned(),
        }
        .ok_or_else(|| {
            CliError::Config(format!("{}: no stored population for generation {generation:?}", run.id))
        })?;
        let (g, population) = import_population_csv(&dir.join(&file), run.spec.genes.len())?;
        let stem = match generation {
            None => run.id.clone(),
            Some(g) => format!("{}-gen{g:03}", run.id),
        };
        let (front, _) = write_front(dir, &manifest, run, g, &population, &stem)?;
        for ext in ["csv", "json", "summary.json"] {
            written.push(dir.join(format!("fronts/{stem}.{ext}")));
        }
        fronts.push((run.id.clone(), front, file));
    }
    let suffix = generation.map(|g| format!("-gen{g:03}")).unwrap_or_default();
    for plot in write_plots(dir, &manifest, &fronts, &suffix)? {
        written.push(dir.join(plot.file));
    }
    Ok(written)
}
