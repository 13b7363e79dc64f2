use serde_json::Value;

/// A rectangular result table rendered as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory cannot fail");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory cannot fail");
        }
        String::from_utf8(w.into_inner().expect("flushing memory cannot fail")).expect("fields are UTF-8")
    }
}

/// What a subcommand produced: the same data as a table and as JSON, plus
/// any numerical-contract violations found along the way.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub json: Value,
    pub violations: Vec<String>,
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
