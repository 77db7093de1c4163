use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bprm::diagnostics::gelman_rubin;
use bprm::io::{align_truth, read_dataset_csv, read_truth_csv, write_dataset_csv, write_truth_csv};
use bprm::model::Dataset;
use bprm::postprocess::{
    mean_similarity, select_partition_binder, select_partition_pam, select_partition_vi,
    summarize_clusters, Partition,
};
use bprm::sampler::{read_draws_jsonl, run_chain, write_draws_jsonl, Draw, MoveStats, Phase, PosteriorSample, ProposalScales, TraceRow};
use bprm::simgen::{
    cluster_count_summary, generate_scenario_dataset, misclassification_rates, relative_bias,
    CountSummary, MisclassificationRates, Scenario, ScenarioSpec,
};
use bprm::tempering::{run_parallel_tempering, PairSwapStats};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Manifest, Method, RunConfig};
use crate::error::{CliError, CliResult};
use crate::{DiagnoseArgs, EvaluateArgs, FitArgs, PostprocessArgs, ReportArgs, SimulateArgs};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn out_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(bprm::Error::from)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    Ok(serde_json::from_reader(open(path)?).map_err(bprm::Error::from)?)
}

fn load_data(path: &Path) -> CliResult<Dataset> {
    Ok(read_dataset_csv(open(path)?, None)?)
}

fn draws_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("draws.jsonl")
    } else {
        path.to_path_buf()
    }
}

fn load_draws(path: &Path) -> CliResult<Vec<Draw>> {
    let path = draws_path(path);
    let draws = read_draws_jsonl(open(&path)?)?;
    if draws.is_empty() {
        return Err(bprm::Error::EmptySample.into());
    }
    Ok(draws)
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let config = load_config(args.config.as_deref())?;
    let scenario: Scenario = args.scenario.parse()?;
    let mut spec = ScenarioSpec::named(scenario).with_n_per_cluster(args.n);
    spec.censoring = config.censoring;
    let sim = generate_scenario_dataset(&spec, args.seed)?;
    out_dir(&args.out)?;
    write_dataset_csv(create(&args.out.join("data.csv"))?, &sim.dataset)?;
    write_truth_csv(create(&args.out.join("truth.csv"))?, &sim.truth)?;
    let mut manifest = Manifest::new("simulate", &config, vec![args.seed], vec![]);
    manifest.scenario = Some(args.scenario.clone());
    manifest.n_per_cluster = Some(args.n);
    write_json(&args.out.join("manifest.json"), &manifest)?;
    let events = sim.dataset.individuals.iter().filter(|i| i.event).count();
    println!(
        "{}: {} individuals, {} events, written to {}",
        args.scenario,
        sim.dataset.len(),
        events,
        args.out.display()
    );
    Ok(())
}

/// Move statistics and final tuning of a fitted chain.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitStats {
    pub moves: MoveStats,
    pub final_scales: ProposalScales,
    pub swaps: Vec<PairSwapStats>,
    pub overall_swap_rate: Option<f64>,
}

fn apply_fit_overrides(config: &mut RunConfig, args: &FitArgs) -> CliResult<()> {
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = &args.ladder {
        config.ladder.temperatures = t.clone();
    }
    if let Some(n) = args.npt {
        config.ladder.n_pt = n;
    }
    if let Some(n) = args.iters {
        config.sampler.iterations = n;
    }
    if let Some(n) = args.burnin {
        config.sampler.burn_in = n;
    }
    if let Some(n) = args.adaptive_blocks {
        config.sampler.adaptation.n_blocks = n;
    }
    if let Some(n) = args.thin {
        config.sampler.thin = n;
    }
    if args.no_pt {
        config.tempering = false;
    }
    if let Some(a) = &args.alpha_init {
        config.alpha_inits = a.clone();
    }
    if let Some(o) = &args.out {
        config.out = Some(o.clone());
    }
    config.validate()
}

fn fit_one(data: &Dataset, config: &RunConfig, seed: u64) -> CliResult<(PosteriorSample, Vec<PairSwapStats>)> {
    if config.tempering {
        let out = run_parallel_tempering(data, &config.prior, &config.sampler, &config.ladder, seed)?;
        Ok((out.cold, out.swaps))
    } else {
        Ok((run_chain(data, &config.prior, &config.sampler, 1.0, seed)?, vec![]))
    }
}

fn write_fit(dir: &Path, config: &RunConfig, seed: u64, data_path: &Path, sample: &PosteriorSample, swaps: Vec<PairSwapStats>) -> CliResult<()> {
    out_dir(dir)?;
    write_draws_jsonl(create(&dir.join("draws.jsonl"))?, &sample.draws)?;
    let mut w = csv::Writer::from_writer(create(&dir.join("trace.csv"))?);
    for row in &sample.trace {
        w.serialize(row).map_err(bprm::Error::from)?;
    }
    w.flush().map_err(|e| CliError::io(dir, e))?;
    let mut w = csv::Writer::from_writer(create(&dir.join("timings.csv"))?);
    w.write_record(["iter", "sweep_micros", "allocation_micros"]).map_err(bprm::Error::from)?;
    for (i, (s, a)) in sample.sweep_micros.iter().zip(&sample.allocation_micros).enumerate() {
        w.write_record([i.to_string(), s.to_string(), a.to_string()]).map_err(bprm::Error::from)?;
    }
    w.flush().map_err(|e| CliError::io(dir, e))?;
    let (a, n) = swaps.iter().fold((0, 0), |(a, n), s| (a + s.accepts, n + s.attempts));
    let stats = FitStats {
        moves: sample.stats.clone(),
        final_scales: sample.final_scales.clone(),
        overall_swap_rate: (n > 0).then(|| a as f64 / n as f64),
        swaps,
    };
    write_json(&dir.join("stats.json"), &stats)?;
    let mut run_config = config.clone();
    run_config.seed = seed;
    run_config.alpha_inits = vec![];
    run_config.out = Some(dir.to_path_buf());
    write_json(
        &dir.join("manifest.json"),
        &Manifest::new("fit", &run_config, vec![seed], vec![data_path.to_path_buf()]),
    )
}

pub fn fit(args: FitArgs) -> CliResult<()> {
    let mut config = load_config(args.config.as_deref())?;
    apply_fit_overrides(&mut config, &args)?;
    let out = config
        .out
        .clone()
        .ok_or_else(|| CliError::Config("an output directory is required (--out)".into()))?;
    let data = load_data(&args.data)?;
    if config.alpha_inits.is_empty() {
        let (sample, swaps) = fit_one(&data, &config, config.seed)?;
        write_fit(&out, &config, config.seed, &args.data, &sample, swaps)?;
        println!(
            "{} draws, mean non-empty clusters {:.2}, written to {}",
            sample.draws.len(),
            mean_nonempty(&sample.draws),
            out.display()
        );
        return Ok(());
    }
    let runs = config
        .alpha_inits
        .par_iter()
        .enumerate()
        .map(|(c, &alpha)| {
            let mut cfg = config.clone();
            cfg.sampler.alpha_init = Some(alpha);
            let seed = config.seed.wrapping_add(c as u64);
            let (sample, swaps) = fit_one(&data, &cfg, seed)?;
            write_fit(&out.join(format!("chain_{c}")), &cfg, seed, &args.data, &sample, swaps)?;
            let counts: Vec<usize> = sample.draws.iter().map(Draw::n_nonempty).collect();
            Ok((alpha, seed, cluster_count_summary(&counts)?))
        })
        .collect::<CliResult<Vec<(f64, u64, CountSummary)>>>()?;
    let mut w = csv::Writer::from_writer(create(&out.join("cluster_counts.csv"))?);
    w.write_record(["alpha_init", "seed", "mean", "q1", "q3"]).map_err(bprm::Error::from)?;
    println!("alpha_init  non-empty clusters");
    for (alpha, seed, s) in &runs {
        println!("{alpha:>10}  {s}");
        w.write_record([alpha.to_string(), seed.to_string(), s.mean.to_string(), s.q1.to_string(), s.q3.to_string()])
            .map_err(bprm::Error::from)?;
    }
    w.flush().map_err(|e| CliError::io(&out, e))?;
    Ok(())
}

fn mean_nonempty(draws: &[Draw]) -> f64 {
    draws.iter().map(|d| d.n_nonempty() as f64).sum::<f64>() / draws.len().max(1) as f64
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Selection {
    pub method: Method,
    pub n_clusters: usize,
    pub partition: Partition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouettes: Option<Vec<(usize, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_vi: Option<f64>,
}

pub fn postprocess(args: PostprocessArgs) -> CliResult<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(m) = args.method {
        config.postprocess.method = m;
    }
    if let Some(k) = args.kmax {
        config.postprocess.k_max = k;
    }
    if let Some(t) = args.thin {
        config.postprocess.stride = t;
    }
    config.validate()?;
    let pp = &config.postprocess;
    let draws = load_draws(&args.draws)?;
    let samples: Vec<Partition> = draws.iter().map(|d| Partition::new(&d.partition)).collect();
    let similarity = mean_similarity(&samples)?;
    let selection = match pp.method {
        Method::Binder => {
            let (t, p) = select_partition_binder(&samples)?;
            Selection { method: pp.method, n_clusters: p.n_clusters(), partition: p, draw_index: Some(t), silhouettes: None, expected_vi: None }
        }
        Method::Pam => {
            let sel = select_partition_pam(&similarity, pp.k_max)?;
            Selection { method: pp.method, n_clusters: sel.k, partition: sel.partition, draw_index: None, silhouettes: Some(sel.silhouettes), expected_vi: None }
        }
        Method::Vi => {
            let sel = select_partition_vi(&samples, &[], pp.stride)?;
            Selection { method: pp.method, n_clusters: sel.partition.n_clusters(), partition: sel.partition, draw_index: None, silhouettes: None, expected_vi: Some(sel.expected_vi) }
        }
    };
    out_dir(&args.out)?;
    similarity.write_csv(create(&args.out.join("similarity.csv"))?)?;
    write_json(&args.out.join("partition.json"), &selection.partition)?;
    write_json(&args.out.join("selection.json"), &selection)?;
    write_json(
        &args.out.join("manifest.json"),
        &Manifest::new("postprocess", &config, vec![], vec![draws_path(&args.draws)]),
    )?;
    println!("{:?}: {} clusters, sizes {:?}", pp.method, selection.n_clusters, selection.partition.sizes());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunEvaluation {
    pub run: PathBuf,
    pub n_clusters: usize,
    pub misclassification: MisclassificationRates,
    /// Mean bias on beta per true cluster.
    pub bias: Vec<Option<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub runs: Vec<RunEvaluation>,
    pub cluster_counts: CountSummary,
}

fn load_partition(path: &Path, n: usize) -> CliResult<Partition> {
    let labels: Vec<usize> = read_json(path)?;
    if labels.len() != n {
        return Err(bprm::Error::LengthMismatch { left: labels.len(), right: n }.into());
    }
    Ok(Partition::new(&labels))
}

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    let data = load_data(&args.data)?;
    let truth = align_truth(&data, &read_truth_csv(open(&args.truth)?)?)?;
    let mut runs = Vec::with_capacity(args.runs.len());
    for dir in &args.runs {
        let draws = load_draws(dir)?;
        let p = load_partition(&dir.join("partition.json"), data.len())?;
        let report = summarize_clusters(&draws, &p, &data)?;
        runs.push(RunEvaluation {
            run: dir.clone(),
            n_clusters: p.n_clusters(),
            misclassification: misclassification_rates(p.labels(), &report.beta_lower(), &truth)?,
            bias: relative_bias(&draws, &truth)?,
        });
    }
    let counts: Vec<usize> = runs.iter().map(|r| r.n_clusters).collect();
    let evaluation = Evaluation {
        cluster_counts: cluster_count_summary(&counts)?,
        runs,
    };
    out_dir(&args.out)?;
    write_json(&args.out.join("evaluation.json"), &evaluation)?;
    for r in &evaluation.runs {
        println!(
            "{}: {} clusters, false risk {:.4}, missed risk {:.4}",
            r.run.display(),
            r.n_clusters,
            r.misclassification.false_risk,
            r.misclassification.missed_risk
        );
    }
    println!("non-empty clusters: {}", evaluation.cluster_counts);
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Potential scale reduction by traced quantity; absent with a single run.
    pub rhat_alpha: Option<f64>,
    pub rhat_loglik: Option<f64>,
    pub rhat_nonempty: Option<f64>,
    pub swap_rates: Vec<Option<f64>>,
}

pub fn diagnose(args: DiagnoseArgs) -> CliResult<()> {
    let mut traces = Vec::new();
    let mut swap_rates = Vec::new();
    for dir in &args.runs {
        let path = dir.join("trace.csv");
        let mut r = csv::Reader::from_reader(open(&path)?);
        let rows = r
            .deserialize::<TraceRow>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(bprm::Error::from)?;
        traces.push(rows.into_iter().filter(|t| t.phase == Phase::Sampling).collect::<Vec<_>>());
        let stats: FitStats = read_json(&dir.join("stats.json"))?;
        swap_rates.push(stats.overall_swap_rate);
    }
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    let rhat = |f: fn(&TraceRow) -> f64| -> CliResult<Option<f64>> {
        if traces.len() < 2 {
            return Ok(None);
        }
        let chains: Vec<Vec<f64>> = traces.iter().map(|t| t[..len].iter().map(f).collect()).collect();
        Ok(Some(gelman_rubin(&chains)?))
    };
    let diagnostics = Diagnostics {
        rhat_alpha: rhat(|t| t.alpha)?,
        rhat_loglik: rhat(|t| t.loglik)?,
        rhat_nonempty: rhat(|t| t.n_nonempty as f64)?,
        swap_rates,
    };
    out_dir(&args.out)?;
    write_json(&args.out.join("diagnostics.json"), &diagnostics)?;
    println!(
        "R-hat alpha {:?}, loglik {:?}, non-empty {:?}; swap rates {:?}",
        diagnostics.rhat_alpha, diagnostics.rhat_loglik, diagnostics.rhat_nonempty, diagnostics.swap_rates
    );
    Ok(())
}

pub fn report(args: ReportArgs) -> CliResult<()> {
    let data = load_data(&args.data)?;
    let draws = load_draws(&args.draws)?;
    let p = load_partition(&args.partition, data.len())?;
    let report = summarize_clusters(&draws, &p, &data)?;
    out_dir(&args.out)?;
    write_json(&args.out.join("summary.json"), &report)?;
    report.write_csv(create(&args.out.join("summary.csv"))?)?;
    for c in &report.clusters {
        let codes: Vec<String> = c
            .heatmap
            .iter()
            .map(|h| h.map_or("NA".to_string(), |h| h.to_string()))
            .collect();
        println!(
            "cluster {}: n = {}, beta median {:.3} [{:.3}, {:.3}], profile {}",
            c.cluster,
            c.size,
            c.beta.median,
            c.beta.lower,
            c.beta.upper,
            codes.join(" ")
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_path_resolves_directories() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(draws_path(dir.path()), dir.path().join("draws.jsonl"));
        let f = dir.path().join("x.jsonl");
        assert_eq!(draws_path(&f), f);
    }
}
