//! Items, groups and fairness constraints.
//!
//! A [`GroupedDataset`] is immutable once built. Every constructor checks the
//! same invariants: ids are `0..n`, every item has `dim` finite features,
//! every declared group has at least one member, and, under the angular
//! metric, no item is the zero vector.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::DatasetError;
use crate::geometry::MetricKind;

/// Number of Gaussian blobs produced by [`generate_blobs`].
pub const BLOB_COUNT: usize = 10;
/// Blob centers are drawn uniformly from `[-BLOB_SPAN, BLOB_SPAN]²`.
pub const BLOB_SPAN: f64 = 10.0;

/// One data point.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: usize,
    pub group: usize,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GroupedDataset {
    coords: Vec<f64>,
    groups: Vec<usize>,
    members: Vec<Vec<usize>>,
    labels: Vec<String>,
    norms: Vec<f64>,
    metric: MetricKind,
    dim: usize,
}

impl GroupedDataset {
    /// Builds a dataset from items whose ids must run `0..n` in order.
    /// `group_labels` fixes the number of groups `C`.
    pub fn from_items(items: Vec<Item>, group_labels: Vec<String>, metric: MetricKind) -> Result<Self, DatasetError> {
        let mut rows = Vec::with_capacity(items.len());
        let mut groups = Vec::with_capacity(items.len());
        for (position, item) in items.into_iter().enumerate() {
            if item.id != position {
                return Err(DatasetError::IdOutOfOrder {
                    position,
                    found: item.id,
                });
            }
            rows.push(item.features);
            groups.push(item.group);
        }
        Self::build(rows, groups, group_labels, metric)
    }

    /// Builds a dataset from feature rows and group indices. Groups are
    /// labelled `"0"`, `"1"`, ... and `C` is one more than the largest index.
    pub fn from_rows(rows: Vec<Vec<f64>>, groups: Vec<usize>, metric: MetricKind) -> Result<Self, DatasetError> {
        let count = groups.iter().max().map_or(0, |&g| g + 1);
        let labels = (0..count).map(|c| c.to_string()).collect();
        Self::build(rows, groups, labels, metric)
    }

    /// Like [`from_rows`](Self::from_rows) with explicit group labels.
    pub fn with_labels(
        rows: Vec<Vec<f64>>,
        groups: Vec<usize>,
        group_labels: Vec<String>,
        metric: MetricKind,
    ) -> Result<Self, DatasetError> {
        Self::build(rows, groups, group_labels, metric)
    }

    fn build(
        rows: Vec<Vec<f64>>,
        groups: Vec<usize>,
        labels: Vec<String>,
        metric: MetricKind,
    ) -> Result<Self, DatasetError> {
        assert_eq!(rows.len(), groups.len(), "one group index per row");
        if rows.is_empty() {
            return Err(DatasetError::NoRows);
        }
        if labels.is_empty() {
            return Err(DatasetError::NoGroups);
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(DatasetError::NoFeatures);
        }
        let group_count = labels.len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        let mut members = vec![Vec::new(); group_count];
        for (item, (row, &group)) in rows.iter().zip(&groups).enumerate() {
            if row.len() != dim {
                return Err(DatasetError::DimensionMismatch {
                    item,
                    expected: dim,
                    found: row.len(),
                });
            }
            if let Some(index) = row.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFiniteFeature { item, index });
            }
            if group >= group_count {
                return Err(DatasetError::GroupOutOfRange {
                    item,
                    group,
                    groups: group_count,
                });
            }
            members[group].push(item);
            coords.extend_from_slice(row);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(DatasetError::EmptyGroup(empty));
        }
        let norms = if metric == MetricKind::Angular {
            let norms: Vec<f64> = coords
                .chunks_exact(dim)
                .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
                .collect();
            if let Some(zero) = norms.iter().position(|&n| n == 0.0) {
                return Err(DatasetError::ZeroVector(zero));
            }
            norms
        } else {
            Vec::new()
        };
        Ok(Self {
            coords,
            groups,
            members,
            labels,
            norms,
            metric,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn group_count(&self) -> usize {
        self.members.len()
    }

    pub fn group_of(&self, id: usize) -> usize {
        self.groups[id]
    }

    pub fn features(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub(crate) fn norm(&self, id: usize) -> f64 {
        self.norms[id]
    }

    /// Ids of the items in group `c`, ascending.
    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn group_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn item(&self, id: usize) -> Item {
        Item {
            id,
            group: self.groups[id],
            features: self.features(id).to_vec(),
        }
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        (0..self.len()).map(|id| self.item(id))
    }

    /// Per-group counts of the given ids.
    pub fn count_groups(&self, ids: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.group_count()];
        for &id in ids {
            counts[self.groups[id]] += 1;
        }
        counts
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            n: self.len(),
            groups: self.group_count(),
            dim: self.dim,
            metric: self.metric,
            group_labels: self.labels.clone(),
            group_sizes: self.group_sizes(),
        }
    }
}

/// JSON sidecar describing a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub groups: usize,
    pub dim: usize,
    pub metric: MetricKind,
    pub group_labels: Vec<String>,
    pub group_sizes: Vec<usize>,
}

/// Reads a comma-separated file with one group column; every other column is
/// a numeric feature.
///
/// `group_column` is matched against the header names first (when `has_header`
/// is set), then read as a 1-based column index; `"last"` picks the final
/// column. Group labels become dense indices in order of first appearance.
/// Rows in error messages are file line numbers, columns are 1-based.
pub fn load_csv(
    path: &Path,
    group_column: &str,
    metric: MetricKind,
    has_header: bool,
) -> Result<GroupedDataset, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(BufReader::new(file), group_column, metric, has_header)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    group_column: &str,
    metric: MetricKind,
    has_header: bool,
) -> Result<GroupedDataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = if has_header {
        Some(rdr.headers().map_err(csv_error)?.clone())
    } else {
        None
    };

    let mut group_col = None;
    let mut arity = headers.as_ref().map(csv::StringRecord::len);
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();

    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let row = record.position().map_or(0, |p| p.line());
        let expected = *arity.get_or_insert(record.len());
        if record.len() != expected {
            return Err(DatasetError::Ragged {
                row,
                expected,
                found: record.len(),
            });
        }
        let gc = match group_col {
            Some(gc) => gc,
            None => {
                let gc = resolve_group_column(group_column, headers.as_ref(), expected)?;
                if expected < 2 {
                    return Err(DatasetError::NoFeatures);
                }
                *group_col.insert(gc)
            }
        };
        let mut features = Vec::with_capacity(expected - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == gc {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| DatasetError::NonNumeric {
                row,
                column: col + 1,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DatasetError::NonFinite {
                    row,
                    column: col + 1,
                    value: cell.to_string(),
                });
            }
            features.push(value);
        }
        let label = &record[gc];
        if label.is_empty() {
            return Err(DatasetError::EmptyGroupLabel { row });
        }
        let group = match label_index.get(label) {
            Some(&g) => g,
            None => {
                labels.push(label.to_string());
                label_index.insert(label.to_string(), labels.len() - 1);
                labels.len() - 1
            }
        };
        rows.push(features);
        groups.push(group);
    }
    if rows.is_empty() {
        return Err(DatasetError::NoRows);
    }
    GroupedDataset::build(rows, groups, labels, metric)
}

fn csv_error(err: csv::Error) -> DatasetError {
    let row = err.position().map_or(0, |p| p.line());
    DatasetError::Csv {
        row,
        message: err.to_string(),
    }
}

fn resolve_group_column(spec: &str, headers: Option<&csv::StringRecord>, arity: usize) -> Result<usize, DatasetError> {
    if let Some(pos) = headers.and_then(|h| h.iter().position(|name| name == spec)) {
        return Ok(pos);
    }
    if spec.eq_ignore_ascii_case("last") && arity > 0 {
        return Ok(arity - 1);
    }
    match spec.parse::<usize>() {
        Ok(one_based) if (1..=arity).contains(&one_based) => Ok(one_based - 1),
        _ => Err(DatasetError::UnknownGroupColumn(spec.to_string())),
    }
}

/// Writes features followed by the group label as the last column. With
/// `header`, the first line is `f0,...,f{dim-1},group`. Floats are written in
/// their shortest round-trip form, so [`load_csv`] restores them exactly.
pub fn write_csv<W: Write>(dataset: &GroupedDataset, writer: W, header: bool) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    if header {
        let mut names: Vec<String> = (0..dataset.dim()).map(|i| format!("f{i}")).collect();
        names.push("group".to_string());
        wtr.write_record(&names)?;
    }
    let mut cells = Vec::with_capacity(dataset.dim() + 1);
    for id in 0..dataset.len() {
        cells.clear();
        cells.extend(dataset.features(id).iter().map(f64::to_string));
        cells.push(dataset.group_labels()[dataset.group_of(id)].clone());
        wtr.write_record(&cells)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Output of [`generate_blobs_with_centers`].
#[derive(Debug, Clone)]
pub struct Blobs {
    pub dataset: GroupedDataset,
    pub centers: Vec<[f64; 2]>,
}

/// Two-dimensional synthetic data: [`BLOB_COUNT`] isotropic unit-variance
/// Gaussian blobs with centers uniform in `[-10, 10]²`, every point assigned
/// to one of `groups` groups uniformly at random, L2 metric.
///
/// The generator is ChaCha8 seeded through `seed_from_u64(seed)`, so output
/// is identical on every platform for a given seed.
pub fn generate_blobs(n: usize, groups: usize, seed: u64) -> Result<GroupedDataset, DatasetError> {
    generate_blobs_with_centers(n, groups, seed).map(|b| b.dataset)
}

pub fn generate_blobs_with_centers(n: usize, groups: usize, seed: u64) -> Result<Blobs, DatasetError> {
    if groups == 0 {
        return Err(DatasetError::NoGroups);
    }
    if n < groups {
        return Err(DatasetError::TooFewItems { n, groups });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 2]> = (0..BLOB_COUNT)
        .map(|_| {
            [
                rng.random_range(-BLOB_SPAN..=BLOB_SPAN),
                rng.random_range(-BLOB_SPAN..=BLOB_SPAN),
            ]
        })
        .collect();

    let mut rows = Vec::with_capacity(n);
    let mut assignment = Vec::with_capacity(n);
    for _ in 0..n {
        let center = centers[rng.random_range(0..BLOB_COUNT)];
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        rows.push(vec![center[0] + dx, center[1] + dy]);
        assignment.push(rng.random_range(0..groups));
    }

    // Uniform assignment can leave a group empty when n is close to C.
    // Each empty group takes the highest-id item of the currently largest
    // group (lowest index on ties).
    let mut sizes = vec![0usize; groups];
    for &g in &assignment {
        sizes[g] += 1;
    }
    for empty in 0..groups {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..groups)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .expect("groups > 0");
        let moved = (0..n)
            .rev()
            .find(|&i| assignment[i] == donor)
            .expect("donor group is non-empty");
        assignment[moved] = empty;
        sizes[donor] -= 1;
        sizes[empty] += 1;
    }

    let labels = (0..groups).map(|c| format!("g{c}")).collect();
    let dataset = GroupedDataset::build(rows, assignment, labels, MetricKind::L2)?;
    Ok(Blobs { dataset, centers })
}

/// Target size `k` plus inclusive per-group bounds `(l_c, h_c)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessConstraints {
    pub k: usize,
    pub bounds: Vec<(usize, usize)>,
}

impl FairnessConstraints {
    pub fn new(k: usize, bounds: Vec<(usize, usize)>) -> Self {
        Self { k, bounds }
    }

    /// Parses `l1:h1,l2:h2,...`.
    pub fn parse(k: usize, spec: &str) -> Result<Self, DatasetError> {
        let syntax = || DatasetError::BoundsSyntax(spec.to_string());
        let bounds = spec
            .split(',')
            .map(|pair| {
                let (l, h) = pair.trim().split_once(':').ok_or_else(syntax)?;
                Ok((
                    l.trim().parse().map_err(|_| syntax())?,
                    h.trim().parse().map_err(|_| syntax())?,
                ))
            })
            .collect::<Result<Vec<_>, DatasetError>>()?;
        Ok(Self { k, bounds })
    }

    pub fn group_count(&self) -> usize {
        self.bounds.len()
    }

    pub fn lower(&self, c: usize) -> usize {
        self.bounds[c].0
    }

    pub fn upper(&self, c: usize) -> usize {
        self.bounds[c].1
    }

    /// Membership in the feasible family: `|S| = k` and every group count
    /// within its bounds.
    pub fn admits(&self, group_counts: &[usize]) -> bool {
        group_counts.len() == self.bounds.len()
            && group_counts.iter().sum::<usize>() == self.k
            && group_counts
                .iter()
                .zip(&self.bounds)
                .all(|(&x, &(l, h))| l <= x && x <= h)
    }

    /// Every violated clause of `l_c ≤ h_c ≤ |V_c|` and `Σl ≤ k ≤ Σh`.
    pub fn violations(&self, group_sizes: &[usize]) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.k == 0 {
            out.push(Violation::ZeroK);
        }
        if self.bounds.len() != group_sizes.len() {
            out.push(Violation::GroupCountMismatch {
                expected: group_sizes.len(),
                found: self.bounds.len(),
            });
            return out;
        }
        for (group, (&(lower, upper), &size)) in self.bounds.iter().zip(group_sizes).enumerate() {
            if lower > upper {
                out.push(Violation::LowerAboveUpper { group, lower, upper });
            }
            if upper > size {
                out.push(Violation::UpperAboveSize { group, upper, size });
            }
        }
        let lower_sum: usize = self.bounds.iter().map(|b| b.0).sum();
        let upper_sum: usize = self.bounds.iter().map(|b| b.1).sum();
        if lower_sum > self.k {
            out.push(Violation::LowerSumAboveK {
                sum: lower_sum,
                k: self.k,
            });
        }
        if self.k > upper_sum {
            out.push(Violation::KAboveUpperSum {
                k: self.k,
                sum: upper_sum,
            });
        }
        out
    }
}

/// One violated clause of the constraint assumptions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ZeroK,
    GroupCountMismatch { expected: usize, found: usize },
    LowerAboveUpper { group: usize, lower: usize, upper: usize },
    UpperAboveSize { group: usize, upper: usize, size: usize },
    LowerSumAboveK { sum: usize, k: usize },
    KAboveUpperSum { k: usize, sum: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::ZeroK => write!(f, "k must be positive"),
            Violation::GroupCountMismatch { expected, found } => {
                write!(f, "{found} bound pairs given for {expected} groups")
            }
            Violation::LowerAboveUpper { group, lower, upper } => write!(f, "group {group}: l = {lower} > h = {upper}"),
            Violation::UpperAboveSize { group, upper, size } => {
                write!(f, "group {group}: h = {upper} > |V| = {size}")
            }
            Violation::LowerSumAboveK { sum, k } => write!(f, "sum of l = {sum} > k = {k}"),
            Violation::KAboveUpperSum { k, sum } => write!(f, "k = {k} > sum of h = {sum}"),
        }
    }
}

/// Non-empty list of violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidationReport(pub Vec<Violation>);

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_constraints(dataset: &GroupedDataset, fc: &FairnessConstraints) -> Result<(), ValidationReport> {
    let violations = fc.violations(&dataset.group_sizes());
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport(violations))
    }
}

/// Proportional-representation bounds relaxed by `alpha`:
/// `l_c = max(1, ⌊(1-α)·k·|V_c|/n⌋)` and `h_c = min(|V_c|, ⌈(1+α)·k·|V_c|/n⌉)`.
pub fn derive_proportional_bounds(
    dataset: &GroupedDataset,
    k: usize,
    alpha: f64,
) -> Result<FairnessConstraints, DatasetError> {
    let n = dataset.len();
    if k == 0 || k > n {
        return Err(DatasetError::InvalidK { k, n });
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(DatasetError::InvalidAlpha(alpha));
    }
    let bounds = dataset
        .group_sizes()
        .into_iter()
        .map(|size| {
            let share = (k * size) as f64;
            let lower = (((1.0 - alpha) * share) / n as f64).floor() as usize;
            let upper = (((1.0 + alpha) * share) / n as f64).ceil() as usize;
            (lower.max(1), upper.min(size))
        })
        .collect();
    let fc = FairnessConstraints { k, bounds };
    validate_constraints(dataset, &fc).map_err(DatasetError::InfeasibleBounds)?;
    Ok(fc)
}
