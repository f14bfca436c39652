use std::path::{Path, PathBuf};

use simcorr::ar1::{self, Ar1Model};
use simcorr::feed::{check_presence_only, format_f64, read_feed, write_feed};
use simcorr::gold::{compare_to_oracle, posterior_for_missing};
use simcorr::invasion::{self, InvasionModel};
use simcorr::matrix::check_feed;
use simcorr::summary::distinct_ess;
use simcorr::{run_filter, FilterOutput, ObservationMatrix, SisError};

use crate::config::{ExperimentConfig, ModelKind, ModelSpec};
use crate::CliError;

/// Output files held in memory until written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_owned(), content));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn cell_header(cells: usize) -> Vec<String> {
    std::iter::once("time".to_owned())
        .chain((1..=cells).map(|m| format!("cell_{m}")))
        .collect()
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

/// A loaded or simulated feed, plus the files describing a simulation.
struct Feed<C> {
    matrices: Vec<ObservationMatrix<C>>,
    simulated: Artifacts,
}

fn ar1_feed(config: &ExperimentConfig, model: &Ar1Model, steps: usize) -> Result<Feed<f64>, CliError> {
    if config.simulates_feed() {
        let truth = ar1::simulate_truth(&model.params, steps, config.truth_seed());
        let mut simulated = Artifacts::default();
        simulated.add("feed.txt", write_feed(&truth.feed));
        let rows = truth
            .trajectory
            .iter()
            .enumerate()
            .map(|(i, x)| vec![(i + 1).to_string(), format_f64(*x)]);
        simulated.add("truth.csv", csv_string(&header(&["time", "x"]), rows));
        return Ok(Feed {
            matrices: truth.feed,
            simulated,
        });
    }
    let matrices: Vec<ObservationMatrix<f64>> = read_feed(&read_text(Path::new(&config.feed))?)?;
    check_feed(&matrices)?;
    if matrices[0].cols() != 1 {
        return Err(CliError::Config(format!("an ar1 feed has one column, found {}", matrices[0].cols())));
    }
    Ok(Feed {
        matrices,
        simulated: Artifacts::default(),
    })
}

fn invasion_feed(config: &ExperimentConfig, model: &InvasionModel) -> Result<Feed<bool>, CliError> {
    let params = &model.params;
    if config.simulates_feed() {
        let truth = invasion::simulate_truth(params, config.truth_seed())?;
        let mut simulated = Artifacts::default();
        simulated.add("feed.txt", write_feed(&truth.feed));
        let rows = (0..truth.trajectory.rows()).map(|i| {
            std::iter::once((i + 1).to_string())
                .chain(truth.trajectory.row(i).iter().map(|&b| u8::from(b).to_string()))
                .collect()
        });
        simulated.add("truth.csv", csv_string(&cell_header(params.cells()), rows));
        return Ok(Feed {
            matrices: truth.feed,
            simulated,
        });
    }
    let matrices: Vec<ObservationMatrix<bool>> = read_feed(&read_text(Path::new(&config.feed))?)?;
    invasion::check_feed(&matrices, Some(params.origin()))?;
    if matrices[0].cols() != params.cells() {
        return Err(CliError::Config(format!(
            "feed has {} cells, config has {}",
            matrices[0].cols(),
            params.cells()
        )));
    }
    Ok(Feed {
        matrices,
        simulated: Artifacts::default(),
    })
}

fn summary_csv<C: simcorr::Coordinate>(out: &FilterOutput<C>) -> String {
    let smoothing = out.smoothing_summaries();
    let rows = smoothing.iter().enumerate().flat_map(|(i, coords)| {
        let step = &out.steps[i];
        coords.iter().enumerate().map(move |(m, s)| {
            vec![
                (i + 1).to_string(),
                (m + 1).to_string(),
                format_f64(s.mean),
                format_f64(s.variance),
                format_f64(s.q05),
                format_f64(s.q50),
                format_f64(s.q95),
                format_f64(step.ess),
                step.discarded.to_string(),
            ]
        })
    });
    csv_string(
        &header(&["time", "coord", "mean", "variance", "q05", "q50", "q95", "ess", "discarded"]),
        rows,
    )
}

fn heatmap_csv(out: &FilterOutput<bool>) -> String {
    let smoothing = out.smoothing_summaries();
    let rows = smoothing.iter().enumerate().map(|(i, coords)| {
        std::iter::once((i + 1).to_string())
            .chain(coords.iter().map(|s| format_f64(s.mean)))
            .collect()
    });
    csv_string(&cell_header(out.dim()), rows)
}

fn gold_csv(model: &Ar1Model, feed: &[ObservationMatrix<f64>], out: &FilterOutput<f64>) -> Result<String, CliError> {
    let z = feed.last().expect("nonempty feed");
    let mut rows = Vec::new();
    for i in 0..z.rows() {
        let Some((oracle, kind)) = posterior_for_missing(&model.params, z, i)? else {
            continue;
        };
        let samples = out.marginal(i, 0);
        let c = compare_to_oracle(&samples, &oracle)?;
        let s = simcorr::summary::summarize(&samples);
        rows.push(vec![
            (i + 1).to_string(),
            kind.label().to_owned(),
            format_f64(oracle.mean),
            format_f64(oracle.variance),
            format_f64(s.mean),
            format_f64(s.variance),
            format_f64(c.ks_distance),
            format_f64(c.mean_error),
            format_f64(c.var_error),
            format_f64(distinct_ess(&samples)),
        ]);
    }
    Ok(csv_string(
        &header(&[
            "time",
            "kind",
            "oracle_mean",
            "oracle_variance",
            "particle_mean",
            "particle_variance",
            "ks_distance",
            "mean_error",
            "var_error",
            "distinct_ess",
        ]),
        rows,
    ))
}

fn manifest(config: &ExperimentConfig) -> Result<String, CliError> {
    Ok(config.resolved()?.to_json() + "\n")
}

/// Simulates (or loads) the feed, runs the filter and produces every output
/// file the model supports.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let filter = config.filter_config()?;
    let mut artifacts = Artifacts::default();
    match config.model_spec()? {
        ModelSpec::Ar1 { model, steps } => {
            let feed = ar1_feed(config, &model, steps)?;
            let out = run_filter(&model, &feed.matrices, filter)?;
            artifacts.add("summary.csv", summary_csv(&out));
            artifacts.add("gold_compare.csv", gold_csv(&model, &feed.matrices, &out)?);
            artifacts.files.extend(feed.simulated.files);
        }
        ModelSpec::Invasion(model) => {
            let feed = invasion_feed(config, &model)?;
            let out = run_filter(&model, &feed.matrices, filter)?;
            artifacts.add("summary.csv", summary_csv(&out));
            artifacts.add("heatmap.csv", heatmap_csv(&out));
            artifacts.files.extend(feed.simulated.files);
        }
    }
    artifacts.add("manifest.json", manifest(config)?);
    Ok(artifacts)
}

/// Ground truth and feed only.
pub fn simulate_truth(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    if !config.simulates_feed() {
        return Err(CliError::Config("simulate-truth needs `feed` = \"simulate\"".into()));
    }
    let mut artifacts = match config.model_spec()? {
        ModelSpec::Ar1 { model, steps } => ar1_feed(config, &model, steps)?.simulated,
        ModelSpec::Invasion(model) => invasion_feed(config, &model)?.simulated,
    };
    artifacts.add("manifest.json", manifest(config)?);
    Ok(artifacts)
}

/// Filter output against the exact Gaussian posterior (ar1 only).
pub fn compare_gold(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let ModelSpec::Ar1 { model, steps } = config.model_spec()? else {
        return Err(CliError::Config("compare-gold applies to the ar1 model".into()));
    };
    let feed = ar1_feed(config, &model, steps)?;
    let out = run_filter(&model, &feed.matrices, config.filter_config()?)?;
    let mut artifacts = Artifacts::default();
    artifacts.add("gold_compare.csv", gold_csv(&model, &feed.matrices, &out)?);
    artifacts.add("manifest.json", manifest(config)?);
    Ok(artifacts)
}

/// Exact occupancy probabilities by enumeration (invasion only).
pub fn enumerate(config: &ExperimentConfig) -> Result<(Artifacts, f64), CliError> {
    let ModelSpec::Invasion(model) = config.model_spec()? else {
        return Err(CliError::Config("enumerate applies to the invasion model".into()));
    };
    let feed = invasion_feed(config, &model)?;
    let exact = invasion::exact_posterior(&model.params, feed.matrices.last().expect("nonempty feed"))?;
    let rows = exact.occupancy.iter().enumerate().map(|(i, row)| {
        std::iter::once((i + 1).to_string())
            .chain(row.iter().map(|p| format_f64(*p)))
            .collect()
    });
    let mut artifacts = Artifacts::default();
    artifacts.add("enumeration.csv", csv_string(&cell_header(model.params.cells()), rows));
    artifacts.add("manifest.json", manifest(config)?);
    Ok((artifacts, exact.log_evidence))
}

/// Outcome of checking a feed file.
#[derive(Debug, Clone, PartialEq)]
pub enum FeedReport {
    Ok { steps: usize, cols: usize },
    Violation(String),
}

impl std::fmt::Display for FeedReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeedReport::Ok { steps, cols } => write!(f, "ok ({steps} steps, {cols} columns)"),
            FeedReport::Violation(reason) => write!(f, "violation: {reason}"),
        }
    }
}

/// Checks shape, monotone revelation and, for invasion feeds, the
/// presence-only rule.
pub fn validate_feed(path: &PathBuf, model: ModelKind) -> Result<FeedReport, CliError> {
    let text = read_text(path)?;
    let checked: Result<(usize, usize), SisError> = match model {
        ModelKind::Ar1 => read_feed::<f64>(&text).and_then(|feed| {
            check_feed(&feed)?;
            Ok((feed.len(), feed[0].cols()))
        }),
        ModelKind::Invasion => read_feed::<bool>(&text).and_then(|feed| {
            check_presence_only(&feed)?;
            invasion::check_feed(&feed, None)?;
            Ok((feed.len(), feed[0].cols()))
        }),
    };
    Ok(match checked {
        Ok((steps, cols)) => FeedReport::Ok { steps, cols },
        Err(e) => FeedReport::Violation(e.to_string()),
    })
}
