//! Experiment harness: parameter sweeps with repeated trials.
//!
//! A sweep varies one axis (`k`, `epsilon`, `n` or `groups`) over a list of
//! values and runs `trials` repetitions of one algorithm per value. Every
//! trial yields one [`BenchRecord`]; failures are recorded in the row instead
//! of aborting the sweep.
//!
//! Randomness is keyed off the sweep seed: synthetic data for `(n, C)` uses
//! `derive_seed(seed, [DATA_STREAM, n, C])`, so every configuration sharing
//! `n` and `C` sees the same dataset, and trial `t` starts its greedy pass at
//! item `derive_seed(seed, [TRIAL_STREAM, t]) mod n` in every configuration,
//! so configurations are compared on the same starts.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{derive_proportional_bounds, generate_blobs, FairnessConstraints, GroupedDataset};
use crate::error::SolveError;
use crate::exact::{solve_exact, ExactOptions};
use crate::geometry::DEFAULT_MAX_PAIRWISE_ITEMS;
use crate::greedy::gmm;
use crate::oracle::{brute_force_fmmd, brute_force_mmd, DEFAULT_ENUMERATION_BUDGET};
use crate::rng::derive_seed;
use crate::scalable::{solve_scalable, FloorPolicy, ScalableConfig, DEFAULT_EPSILON};
use crate::solution::{Diagnostics, Solution};

/// Path component reserved for synthetic-data seeds.
pub const DATA_STREAM: u64 = 0xDA7A;
/// Path component reserved for greedy start seeds.
pub const TRIAL_STREAM: u64 = 0x7121;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Scalable,
    Gmm,
    Oracle,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Exact => "exact",
            Algorithm::Scalable => "scalable",
            Algorithm::Gmm => "gmm",
            Algorithm::Oracle => "oracle",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Algorithm::Exact),
            "scalable" => Ok(Algorithm::Scalable),
            "gmm" => Ok(Algorithm::Gmm),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(format!(
                "unknown algorithm {other:?}; expected exact, scalable, gmm or oracle"
            )),
        }
    }
}

/// Solver knobs shared by the CLI and the sweep runner.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    pub epsilon: f64,
    pub start: usize,
    pub floor_policy: FloorPolicy,
    pub node_budget: Option<u64>,
    pub max_items: usize,
    pub enumeration_budget: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            start: 0,
            floor_policy: FloorPolicy::Error,
            node_budget: None,
            max_items: DEFAULT_MAX_PAIRWISE_ITEMS,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Runs one algorithm. `exact` and `scalable` require constraints; `oracle`
/// without constraints solves the unconstrained problem of size `k`; `gmm`
/// ignores the bounds but reports whether its pick happens to satisfy them
/// (`feasible` diagnostic, 0 or 1).
pub fn run_algorithm(
    algorithm: Algorithm,
    dataset: &GroupedDataset,
    k: usize,
    fc: Option<&FairnessConstraints>,
    params: &SolveParams,
) -> Result<Solution, SolveError> {
    let started = Instant::now();
    let need_fc =
        || fc.ok_or_else(|| SolveError::InvalidParameter(format!("algorithm {algorithm} needs fairness constraints")));
    let mut solution = match algorithm {
        Algorithm::Exact => {
            let options = ExactOptions {
                node_budget: params.node_budget,
                max_items: params.max_items,
            };
            solve_exact(dataset, need_fc()?, &options)?
        }
        Algorithm::Scalable => {
            let config = ScalableConfig::new(params.epsilon)?
                .with_start(params.start)
                .with_floor_policy(params.floor_policy)
                .with_node_budget(params.node_budget);
            solve_scalable(dataset, need_fc()?, &config)?
        }
        Algorithm::Gmm => {
            let ids = gmm(dataset, k, params.start)?;
            let mut diag = Diagnostics::default();
            if let Some(fc) = fc {
                diag.set_count("feasible", u64::from(fc.admits(&dataset.count_groups(&ids))));
            }
            Solution::new(dataset, ids, diag)
        }
        Algorithm::Oracle => match fc {
            Some(fc) => brute_force_fmmd(dataset, fc, params.enumeration_budget)?,
            None => brute_force_mmd(dataset, k, params.enumeration_budget)?,
        },
    };
    solution
        .diagnostics
        .set_real("elapsed_ms", started.elapsed().as_secs_f64() * 1e3);
    Ok(solution)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    K,
    Epsilon,
    N,
    Groups,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::K => "k",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::N => "n",
            SweepAxis::Groups => "groups",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "k" => Ok(SweepAxis::K),
            "epsilon" | "eps" => Ok(SweepAxis::Epsilon),
            "n" => Ok(SweepAxis::N),
            "groups" | "C" | "c" => Ok(SweepAxis::Groups),
            other => Err(format!(
                "unknown sweep axis {other:?}; expected k, epsilon, n or groups"
            )),
        }
    }
}

/// Where a sweep gets its data from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Synthetic blobs of `base.n` items in `base.groups` groups (or the
    /// swept values of those).
    Blobs,
    /// A fixed dataset; the `n` and `groups` axes are unavailable.
    Fixed { name: String, dataset: GroupedDataset },
}

/// Settings of every configuration before the swept axis is applied.
#[derive(Debug, Clone)]
pub struct BaseConfig {
    pub n: usize,
    pub groups: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Proportional-bound slack; ignored when `bounds` is set.
    pub alpha: f64,
    pub bounds: Option<Vec<(usize, usize)>>,
    pub params: SolveParams,
}

impl Default for BaseConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            groups: 2,
            k: 10,
            epsilon: DEFAULT_EPSILON,
            alpha: 0.2,
            bounds: None,
            params: SolveParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub algorithm: Algorithm,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub base: BaseConfig,
    pub source: DataSource,
}

/// One trial. Column order of the CSV output follows the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub config: usize,
    pub algorithm: Algorithm,
    pub dataset: String,
    pub n: usize,
    pub groups: usize,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub trial: usize,
    pub diversity: Option<f64>,
    pub elapsed_ms: f64,
    pub iterations: Option<u64>,
    pub coreset_max: Option<u64>,
    pub ilp_nodes: Option<u64>,
    pub error: Option<String>,
}

pub const RECORD_COLUMNS: [&str; 14] = [
    "config",
    "algorithm",
    "dataset",
    "n",
    "groups",
    "k",
    "epsilon",
    "trial",
    "diversity",
    "elapsed_ms",
    "iterations",
    "coreset_max",
    "ilp_nodes",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Per-configuration aggregate over successful trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config: usize,
    pub axis: SweepAxis,
    pub value: f64,
    pub algorithm: Algorithm,
    pub dataset: String,
    pub n: usize,
    pub groups: usize,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub trials: usize,
    pub succeeded: usize,
    pub diversity: Option<Stats>,
    pub elapsed_ms: Option<Stats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub records: Vec<BenchRecord>,
    pub summaries: Vec<ConfigSummary>,
}

/// Problems with the sweep itself (as opposed to individual trials).
#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("a sweep needs at least one value and one trial")]
    Empty,
    #[error("axis {axis} needs positive integer values, got {value}")]
    NonIntegerValue { axis: SweepAxis, value: f64 },
    #[error("axis {0} cannot be swept over a fixed dataset")]
    FixedDataset(SweepAxis),
}

struct Config {
    n: usize,
    groups: usize,
    k: usize,
    epsilon: f64,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport, SweepError> {
    if spec.values.is_empty() || spec.trials == 0 {
        return Err(SweepError::Empty);
    }
    let configs = spec
        .values
        .iter()
        .map(|&value| config_for(spec, value))
        .collect::<Result<Vec<_>, _>>()?;

    let mut cache: HashMap<(usize, usize), Result<GroupedDataset, String>> = HashMap::new();
    let mut records = Vec::with_capacity(configs.len() * spec.trials);
    for (index, config) in configs.iter().enumerate() {
        let (name, dataset) = match &spec.source {
            DataSource::Fixed { name, dataset } => (name.clone(), Ok(dataset)),
            DataSource::Blobs => {
                let key = (config.n, config.groups);
                let entry = cache.entry(key).or_insert_with(|| {
                    let seed = derive_seed(spec.seed, &[DATA_STREAM, key.0 as u64, key.1 as u64]);
                    generate_blobs(key.0, key.1, seed).map_err(|e| e.to_string())
                });
                (
                    format!("blobs-n{}-c{}", key.0, key.1),
                    entry.as_ref().map_err(Clone::clone),
                )
            }
        };
        let uses_epsilon = spec.algorithm == Algorithm::Scalable;
        let blank = |trial: usize| BenchRecord {
            config: index,
            algorithm: spec.algorithm,
            dataset: name.clone(),
            n: config.n,
            groups: config.groups,
            k: config.k,
            epsilon: uses_epsilon.then_some(config.epsilon),
            trial,
            diversity: None,
            elapsed_ms: 0.0,
            iterations: None,
            coreset_max: None,
            ilp_nodes: None,
            error: None,
        };
        let dataset = match dataset {
            Ok(ds) => ds,
            Err(message) => {
                records.extend((0..spec.trials).map(|t| BenchRecord {
                    error: Some(message.clone()),
                    ..blank(t)
                }));
                continue;
            }
        };
        let constraints = match &spec.base.bounds {
            Some(bounds) => Ok(FairnessConstraints::new(config.k, bounds.clone())),
            None => derive_proportional_bounds(dataset, config.k, spec.base.alpha).map_err(|e| e.to_string()),
        };
        for trial in 0..spec.trials {
            let mut record = blank(trial);
            let fc = match &constraints {
                Ok(fc) => fc,
                Err(message) => {
                    record.error = Some(message.clone());
                    records.push(record);
                    continue;
                }
            };
            let params = SolveParams {
                epsilon: config.epsilon,
                start: (derive_seed(spec.seed, &[TRIAL_STREAM, trial as u64]) % dataset.len() as u64) as usize,
                ..spec.base.params.clone()
            };
            let started = Instant::now();
            let result = run_algorithm(spec.algorithm, dataset, config.k, Some(fc), &params);
            record.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok(sol) => {
                    record.diversity = Some(sol.diversity);
                    record.iterations = sol.diagnostics.count("iterations");
                    record.coreset_max = sol.diagnostics.count("coreset_max");
                    record.ilp_nodes = sol.diagnostics.count("ilp_nodes");
                }
                Err(err) => record.error = Some(err.to_string()),
            }
            records.push(record);
        }
    }
    let summaries = summarize(&records, spec.axis, &spec.values);
    Ok(SweepReport { records, summaries })
}

fn config_for(spec: &SweepSpec, value: f64) -> Result<Config, SweepError> {
    let base = &spec.base;
    let mut config = Config {
        n: base.n,
        groups: base.groups,
        k: base.k,
        epsilon: base.epsilon,
    };
    if let DataSource::Fixed { dataset, .. } = &spec.source {
        if matches!(spec.axis, SweepAxis::N | SweepAxis::Groups) {
            return Err(SweepError::FixedDataset(spec.axis));
        }
        config.n = dataset.len();
        config.groups = dataset.group_count();
    }
    let integer = || {
        if value >= 1.0 && value.fract() == 0.0 && value <= usize::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(SweepError::NonIntegerValue { axis: spec.axis, value })
        }
    };
    match spec.axis {
        SweepAxis::K => config.k = integer()?,
        SweepAxis::N => config.n = integer()?,
        SweepAxis::Groups => config.groups = integer()?,
        SweepAxis::Epsilon => config.epsilon = value,
    }
    Ok(config)
}

/// Mean/min/max of diversity and runtime per configuration, over the
/// records without an error.
pub fn summarize(records: &[BenchRecord], axis: SweepAxis, values: &[f64]) -> Vec<ConfigSummary> {
    let mut out: Vec<ConfigSummary> = Vec::new();
    for (config, &value) in values.iter().enumerate() {
        let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.config == config).collect();
        let Some(first) = rows.first() else { continue };
        let ok: Vec<&&BenchRecord> = rows.iter().filter(|r| r.error.is_none()).collect();
        let diversities: Vec<f64> = ok.iter().filter_map(|r| r.diversity).collect();
        let times: Vec<f64> = ok.iter().map(|r| r.elapsed_ms).collect();
        out.push(ConfigSummary {
            config,
            axis,
            value,
            algorithm: first.algorithm,
            dataset: first.dataset.clone(),
            n: first.n,
            groups: first.groups,
            k: first.k,
            epsilon: first.epsilon,
            trials: rows.len(),
            succeeded: ok.len(),
            diversity: Stats::of(&diversities),
            elapsed_ms: Stats::of(&times),
        });
    }
    out
}

/// Writes records as CSV with a header of [`RECORD_COLUMNS`].
pub fn write_records_csv<W: Write>(records: &[BenchRecord], writer: W) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(RECORD_COLUMNS)?;
    for record in records {
        wtr.serialize(record)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axis: SweepAxis, values: Vec<f64>, trials: usize) -> SweepSpec {
        SweepSpec {
            algorithm: Algorithm::Scalable,
            axis,
            values,
            trials,
            seed: 11,
            base: BaseConfig {
                n: 200,
                groups: 2,
                k: 6,
                ..BaseConfig::default()
            },
            source: DataSource::Blobs,
        }
    }

    #[test]
    fn single_trial_single_row() {
        let report = run_sweep(&spec(SweepAxis::K, vec![5.0], 1)).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.summaries.len(), 1);
        let r = &report.records[0];
        assert!(r.error.is_none(), "{r:?}");
        assert_eq!((r.k, r.trial, r.epsilon), (5, 0, Some(0.05)));
    }

    #[test]
    fn sweeps_are_reproducible_and_summaries_exact() {
        let s = spec(SweepAxis::Epsilon, vec![0.5, 0.1], 4);
        let a = run_sweep(&s).unwrap();
        let b = run_sweep(&s).unwrap();
        let strip = |r: &BenchRecord| (r.config, r.trial, r.diversity, r.iterations);
        assert_eq!(
            a.records.iter().map(strip).collect::<Vec<_>>(),
            b.records.iter().map(strip).collect::<Vec<_>>()
        );
        for summary in &a.summaries {
            let rows: Vec<&BenchRecord> = a.records.iter().filter(|r| r.config == summary.config).collect();
            assert_eq!(rows.len(), 4);
            assert_eq!(rows.iter().map(|r| r.trial).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
            let mean = rows.iter().map(|r| r.diversity.unwrap()).sum::<f64>() / 4.0;
            assert!((summary.diversity.unwrap().mean - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let mut s = spec(SweepAxis::K, vec![4.0, 300.0], 2);
        s.algorithm = Algorithm::Exact;
        let report = run_sweep(&s).unwrap();
        assert_eq!(report.records.len(), 4);
        assert!(report.records[..2].iter().all(|r| r.error.is_none()));
        assert!(report.records[2..].iter().all(|r| r.error.is_some()));
        assert_eq!(report.summaries[1].succeeded, 0);
        assert!(report.summaries[1].diversity.is_none());
    }

    #[test]
    fn groups_axis_regenerates_data() {
        let report = run_sweep(&spec(SweepAxis::Groups, vec![2.0, 3.0], 1)).unwrap();
        assert_eq!(report.records[0].dataset, "blobs-n200-c2");
        assert_eq!(report.records[1].dataset, "blobs-n200-c3");
        assert_eq!(report.records[1].groups, 3);
    }

    #[test]
    fn sweep_validation() {
        assert!(matches!(
            run_sweep(&spec(SweepAxis::K, vec![], 1)),
            Err(SweepError::Empty)
        ));
        assert!(matches!(
            run_sweep(&spec(SweepAxis::N, vec![10.5], 1)),
            Err(SweepError::NonIntegerValue { .. })
        ));
        let mut fixed = spec(SweepAxis::N, vec![10.0], 1);
        fixed.source = DataSource::Fixed {
            name: "x".into(),
            dataset: generate_blobs(20, 2, 0).unwrap(),
        };
        assert!(matches!(run_sweep(&fixed), Err(SweepError::FixedDataset(SweepAxis::N))));
    }

    #[test]
    fn csv_header_matches_columns() {
        let report = run_sweep(&spec(SweepAxis::K, vec![3.0], 2)).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&report.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RECORD_COLUMNS.join(","));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn run_algorithm_requirements() {
        let ds = generate_blobs(30, 2, 5).unwrap();
        let params = SolveParams::default();
        assert!(run_algorithm(Algorithm::Exact, &ds, 4, None, &params).is_err());
        let sol = run_algorithm(Algorithm::Gmm, &ds, 4, None, &params).unwrap();
        assert_eq!(sol.selected.len(), 4);
        let sol = run_algorithm(Algorithm::Oracle, &ds, 3, None, &params).unwrap();
        assert_eq!(sol.selected.len(), 3);
        let fc = FairnessConstraints::new(4, vec![(4, 4), (0, 0)]);
        let sol = run_algorithm(Algorithm::Gmm, &ds, 4, Some(&fc), &params).unwrap();
        assert!(sol.diagnostics.count("feasible").is_some());
    }
}
