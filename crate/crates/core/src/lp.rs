//! Export of a fair independent set instance as a CPLEX-LP text file, so an
//! external MILP solver can cross-check [`crate::fis::solve_fis`].
//!
//! Variable `x<id>` is 1 when item `id` is selected. For an instance with
//! vertices 0..3, the single edge 0-1, `k = 3` and bounds `(1, 2)` for both
//! groups `{0, 1}` and `{2, 3}` the output is
//!
//! ```text
//! \ fair independent set: 4 vertices, 1 edges, 2 groups, k = 3, threshold = 1
//! Maximize
//!  obj: x0 + x1 + x2 + x3
//! Subject To
//!  e0: x0 + x1 <= 1
//!  card: x0 + x1 + x2 + x3 <= 3
//!  g0_lo: x0 + x1 >= 1
//!  g0_hi: x0 + x1 <= 2
//!  g1_lo: x2 + x3 >= 1
//!  g1_hi: x2 + x3 <= 2
//! Binary
//!  x0 x1 x2 x3
//! End
//! ```
//!
//! The instance has a fair independent set iff the optimal objective is `k`.
//! A group with no vertex in the graph gets the rows `0 x<first> >= l` and
//! `0 x<first> <= h`. Long rows wrap onto continuation lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::dataset::{FairnessConstraints, GroupedDataset};
use crate::fis::ThresholdGraph;

const TERMS_PER_LINE: usize = 10;

pub fn export_lp(
    graph: &ThresholdGraph,
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    path: &Path,
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_lp(graph, dataset, fc, &mut out)?;
    out.flush()
}

pub fn lp_string(graph: &ThresholdGraph, dataset: &GroupedDataset, fc: &FairnessConstraints) -> String {
    let mut buf = Vec::new();
    write_lp(graph, dataset, fc, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("LP output is ASCII")
}

pub fn write_lp<W: Write>(
    graph: &ThresholdGraph,
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    out: &mut W,
) -> io::Result<()> {
    let names: Vec<String> = graph.vertices().iter().map(|id| format!("x{id}")).collect();
    let all: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut groups: Vec<Vec<&str>> = vec![Vec::new(); fc.group_count()];
    for (pos, &id) in graph.vertices().iter().enumerate() {
        groups[dataset.group_of(id)].push(&names[pos]);
    }

    writeln!(
        out,
        "\\ fair independent set: {} vertices, {} edges, {} groups, k = {}, threshold = {}",
        graph.vertex_count(),
        graph.edge_count(),
        fc.group_count(),
        fc.k,
        graph.threshold()
    )?;
    writeln!(out, "Maximize")?;
    write_row(out, "obj", &all, None)?;
    writeln!(out, "Subject To")?;
    for (i, (a, b)) in graph.edges().enumerate() {
        writeln!(out, " e{i}: {} + {} <= 1", names[a], names[b])?;
    }
    write_row(out, "card", &all, Some(("<=", fc.k)))?;
    for (c, members) in groups.iter().enumerate() {
        let (lower, upper) = fc.bounds[c];
        if members.is_empty() {
            writeln!(out, " g{c}_lo: 0 {} >= {lower}", all[0])?;
            writeln!(out, " g{c}_hi: 0 {} <= {upper}", all[0])?;
        } else {
            write_row(out, &format!("g{c}_lo"), members, Some((">=", lower)))?;
            write_row(out, &format!("g{c}_hi"), members, Some(("<=", upper)))?;
        }
    }
    writeln!(out, "Binary")?;
    for chunk in all.chunks(TERMS_PER_LINE) {
        writeln!(out, " {}", chunk.join(" "))?;
    }
    writeln!(out, "End")
}

fn write_row<W: Write>(out: &mut W, label: &str, terms: &[&str], rhs: Option<(&str, usize)>) -> io::Result<()> {
    write!(out, " {label}:")?;
    for (i, chunk) in terms.chunks(TERMS_PER_LINE).enumerate() {
        if i > 0 {
            write!(out, "\n   +")?;
        }
        write!(out, " {}", chunk.join(" + "))?;
    }
    match rhs {
        Some((sense, value)) => writeln!(out, " {sense} {value}"),
        None => writeln!(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;

    fn groups_only(groups: &[usize]) -> GroupedDataset {
        GroupedDataset::from_rows(
            (0..groups.len()).map(|i| vec![i as f64]).collect(),
            groups.to_vec(),
            MetricKind::L1,
        )
        .unwrap()
    }

    fn rows_starting(lp: &str, prefix: &str) -> usize {
        lp.lines().filter(|l| l.trim_start().starts_with(prefix)).count()
    }

    #[test]
    fn documented_example() {
        let ds = groups_only(&[0, 0, 1, 1]);
        let g = ThresholdGraph::from_edges(vec![0, 1, 2, 3], &[(0, 1)], 1.0);
        let fc = FairnessConstraints::new(3, vec![(1, 2), (1, 2)]);
        let expected = "\
\\ fair independent set: 4 vertices, 1 edges, 2 groups, k = 3, threshold = 1
Maximize
 obj: x0 + x1 + x2 + x3
Subject To
 e0: x0 + x1 <= 1
 card: x0 + x1 + x2 + x3 <= 3
 g0_lo: x0 + x1 >= 1
 g0_hi: x0 + x1 <= 2
 g1_lo: x2 + x3 >= 1
 g1_hi: x2 + x3 <= 2
Binary
 x0 x1 x2 x3
End
";
        assert_eq!(lp_string(&g, &ds, &fc), expected);
    }

    #[test]
    fn edgeless_pair_structure() {
        let ds = groups_only(&[0, 0]);
        let g = ThresholdGraph::from_edges(vec![0, 1], &[], 0.5);
        let fc = FairnessConstraints::new(2, vec![(0, 2)]);
        let lp = lp_string(&g, &ds, &fc);
        assert_eq!(rows_starting(&lp, "e"), 0);
        assert_eq!(rows_starting(&lp, "card:"), 1);
        assert_eq!(rows_starting(&lp, "g"), 2);
        let binaries = lp.split("Binary\n").nth(1).unwrap().split("End").next().unwrap();
        assert_eq!(binaries.split_whitespace().count(), 2);
    }

    #[test]
    fn file_export_is_deterministic() {
        let ds = groups_only(&[0, 1, 0, 1, 2]);
        let edges: Vec<(usize, usize)> = vec![(0, 2), (1, 3), (2, 4)];
        // Item 4 (group 2) is outside the scope.
        let g = ThresholdGraph::from_edges(vec![0, 1, 2, 3], &edges[..2], 2.0);
        let fc = FairnessConstraints::new(2, vec![(0, 2), (0, 2), (0, 1)]);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.lp"), dir.path().join("b.lp"));
        export_lp(&g, &ds, &fc, &a).unwrap();
        export_lp(&g, &ds, &fc, &b).unwrap();
        let text = std::fs::read(&a).unwrap();
        assert_eq!(text, std::fs::read(&b).unwrap());
        let text = String::from_utf8(text).unwrap();
        assert!(text.contains(" g2_lo: 0 x0 >= 0\n"));
        assert!(text.contains(" g2_hi: 0 x0 <= 1\n"));
    }

    #[test]
    fn long_rows_wrap() {
        let n = 25;
        let ds = groups_only(&vec![0; n]);
        let g = ThresholdGraph::from_edges((0..n).collect(), &[], 1.0);
        let fc = FairnessConstraints::new(3, vec![(0, n)]);
        let lp = lp_string(&g, &ds, &fc);
        assert!(lp.lines().all(|l| l.len() < 255));
        assert!(lp.contains("\n   + x10 + x11"));
        assert_eq!(lp.matches("x24").count(), 5);
    }
}
