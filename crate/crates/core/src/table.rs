//! CSV emission with self-describing `#`-prefixed header lines carrying the
//! fully resolved configuration, so any output file can be regenerated from
//! its own header.

use std::fmt::Write as _;

/// A CSV table under construction: comment headers, column names, rows.
#[derive(Debug, Default, Clone)]
pub struct CsvTable {
    comments: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Add one `# key = value` header line.
    pub fn comment(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.comments.push((key.into(), value.to_string()));
        self
    }

    pub fn row<S: ToString>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        let cells: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        assert_eq!(cells.len(), self.columns.len(), "row arity mismatch");
        self.rows.push(cells);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.comments {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_to(&self, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}

/// Format a float with full round-trip precision.
pub fn full(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_comments_then_header_then_rows() {
        let mut t = CsvTable::new(["x", "y"]);
        t.comment("model.d", 3).comment("grid.l", 16);
        t.row([full(1.0), full(2.5)]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# model.d = 3");
        assert_eq!(lines[1], "# grid.l = 16");
        assert_eq!(lines[2], "x,y");
        assert_eq!(lines[3], "1.0,2.5");
    }

    #[test]
    fn full_precision_roundtrips() {
        let v = 0.1 + 0.2;
        let s = full(v);
        let back: f64 = s.parse().unwrap();
        assert_eq!(v, back);
    }
}
