use std::fmt::Write as _;

use super::percentiles::PercentileSummary;

/// One row of a sweep: coordinates, per-quantity percentiles and
/// reference values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub stats: Vec<PercentileSummary>,
    pub extras: Vec<f64>,
}

/// Tabular percentile output of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub coord_names: Vec<String>,
    pub quantity_names: Vec<String>,
    pub extra_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

impl SweepResult {
    pub fn new(name: &str, coords: &[&str], quantities: &[&str], extras: &[&str]) -> Self {
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        SweepResult {
            name: name.to_string(),
            coord_names: own(coords),
            quantity_names: own(quantities),
            extra_names: own(extras),
            rows: Vec::new(),
        }
    }

    pub fn quantity_index(&self, name: &str) -> Option<usize> {
        self.quantity_names.iter().position(|q| q == name)
    }

    pub fn extra_index(&self, name: &str) -> Option<usize> {
        self.extra_names.iter().position(|q| q == name)
    }

    pub fn header(&self) -> String {
        let mut cols: Vec<String> = self.coord_names.clone();
        for q in &self.quantity_names {
            cols.push(format!("{q}_median"));
            cols.push(format!("{q}_p5"));
            cols.push(format!("{q}_p95"));
            cols.push(format!("{q}_n"));
        }
        cols.extend(self.extra_names.iter().cloned());
        cols.join(",")
    }

    /// Shortest round-trip decimal formatting; `nan` for missing cells.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = row.coords.iter().map(|v| num(*v)).collect();
            for s in &row.stats {
                cells.push(num(s.median));
                cells.push(num(s.p5));
                cells.push(num(s.p95));
                cells.push(s.n.to_string());
            }
            cells.extend(row.extras.iter().map(|v| num(*v)));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = SweepResult::new("x", &["sigma"], &["err"], &["ref"]);
        t.rows.push(SweepRow {
            coords: vec![0.5],
            stats: vec![PercentileSummary { p5: -0.1, median: 0.0, p95: 0.25, n: 20 }],
            extras: vec![f64::NAN],
        });
        assert_eq!(t.to_csv(), "sigma,err_median,err_p5,err_p95,err_n,ref\n0.5,0,-0.1,0.25,20,nan\n");
    }
}
