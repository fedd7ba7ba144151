use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{FairnessConstraints, GroupedDataset};
use crate::geometry::div;

/// A named diagnostic: an integer counter or a real-valued measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiagValue {
    Count(u64),
    Real(f64),
}

impl DiagValue {
    pub fn as_f64(self) -> f64 {
        match self {
            DiagValue::Count(c) => c as f64,
            DiagValue::Real(r) => r,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnostics(pub BTreeMap<String, DiagValue>);

impl Diagnostics {
    pub fn set_count(&mut self, name: &str, value: u64) {
        self.0.insert(name.to_string(), DiagValue::Count(value));
    }

    pub fn set_real(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), DiagValue::Real(value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).map(|v| v.as_f64())
    }

    pub fn count(&self, name: &str) -> Option<u64> {
        match self.0.get(name)? {
            DiagValue::Count(c) => Some(*c),
            DiagValue::Real(_) => None,
        }
    }
}

/// A selected subset together with its objective value.
///
/// `diversity` is `+∞` for subsets of at most one item; it serializes as
/// JSON `null` in that case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub selected: Vec<usize>,
    #[serde(with = "infinite_as_null")]
    pub diversity: f64,
    pub group_counts: Vec<usize>,
    pub diagnostics: Diagnostics,
}

impl Solution {
    /// Sorts `selected` and derives diversity and group counts from the data.
    pub fn new(dataset: &GroupedDataset, mut selected: Vec<usize>, diagnostics: Diagnostics) -> Self {
        selected.sort_unstable();
        let diversity = div(dataset, &selected);
        let group_counts = dataset.count_groups(&selected);
        Self {
            selected,
            diversity,
            group_counts,
            diagnostics,
        }
    }

    /// Re-derives everything checkable from the dataset and reports each
    /// inconsistency. With `fc`, also checks membership in the feasible family.
    pub fn verify(&self, dataset: &GroupedDataset, fc: Option<&FairnessConstraints>) -> Vec<Defect> {
        let mut defects = Vec::new();
        let mut seen = vec![false; dataset.len()];
        for &id in &self.selected {
            match seen.get_mut(id) {
                None => defects.push(Defect::UnknownId(id)),
                Some(flag) if *flag => defects.push(Defect::DuplicateId(id)),
                Some(flag) => *flag = true,
            }
        }
        if !defects.is_empty() {
            return defects;
        }
        let counts = dataset.count_groups(&self.selected);
        if counts != self.group_counts {
            defects.push(Defect::GroupCounts {
                reported: self.group_counts.clone(),
                actual: counts.clone(),
            });
        }
        let actual = div(dataset, &self.selected);
        if actual != self.diversity {
            defects.push(Defect::Diversity {
                reported: self.diversity,
                actual,
            });
        }
        if let Some(fc) = fc {
            if !fc.admits(&counts) {
                defects.push(Defect::Infeasible {
                    size: self.selected.len(),
                    counts,
                });
            }
        }
        defects
    }
}

/// One inconsistency found by [`Solution::verify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defect {
    UnknownId(usize),
    DuplicateId(usize),
    GroupCounts { reported: Vec<usize>, actual: Vec<usize> },
    Diversity { reported: f64, actual: f64 },
    Infeasible { size: usize, counts: Vec<usize> },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::UnknownId(id) => write!(f, "unknown item id {id}"),
            Defect::DuplicateId(id) => write!(f, "item id {id} selected twice"),
            Defect::GroupCounts { reported, actual } => {
                write!(f, "group counts {reported:?} do not match {actual:?}")
            }
            Defect::Diversity { reported, actual } => {
                write!(f, "diversity {reported} does not match recomputed {actual}")
            }
            Defect::Infeasible { size, counts } => {
                write!(
                    f,
                    "selection of size {size} with group counts {counts:?} violates the constraints"
                )
            }
        }
    }
}

mod infinite_as_null {
    use super::*;

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;

    fn line() -> GroupedDataset {
        GroupedDataset::from_rows(
            (0..6).map(|x| vec![f64::from(x)]).collect(),
            vec![0, 1, 0, 1, 0, 1],
            MetricKind::L1,
        )
        .unwrap()
    }

    #[test]
    fn new_derives_fields() {
        let ds = line();
        let s = Solution::new(&ds, vec![5, 0, 2], Diagnostics::default());
        assert_eq!(s.selected, vec![0, 2, 5]);
        assert_eq!(s.diversity, 2.0);
        assert_eq!(s.group_counts, vec![2, 1]);
        let fc = FairnessConstraints::new(3, vec![(1, 2), (1, 2)]);
        assert!(s.verify(&ds, Some(&fc)).is_empty());
    }

    #[test]
    fn verify_reports_defects() {
        let ds = line();
        let mut s = Solution::new(&ds, vec![0, 1], Diagnostics::default());
        s.diversity = 3.0;
        s.group_counts = vec![2, 0];
        let fc = FairnessConstraints::new(3, vec![(1, 2), (1, 2)]);
        let defects = s.verify(&ds, Some(&fc));
        assert_eq!(defects.len(), 3, "{defects:?}");

        let s = Solution {
            selected: vec![0, 0, 9],
            diversity: 0.0,
            group_counts: vec![],
            diagnostics: Diagnostics::default(),
        };
        let defects = s.verify(&ds, None);
        assert_eq!(defects, vec![Defect::DuplicateId(0), Defect::UnknownId(9)]);
    }

    #[test]
    fn singleton_serializes_null_diversity() {
        let ds = line();
        let mut diag = Diagnostics::default();
        diag.set_count("iterations", 3);
        diag.set_real("elapsed_ms", 1.5);
        let s = Solution::new(&ds, vec![4], diag);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"diversity\":null"), "{json}");
        assert!(json.contains("\"iterations\":3"), "{json}");
        let back: Solution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
