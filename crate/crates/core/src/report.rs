//! Plain CSV tables with `#` metadata lines, as written by every subcommand.

use std::io::Write;

/// Format `x` rounded to `digits` significant digits, printed in the
/// shortest form that round-trips the rounded value.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.clamp(1, 17);
    let rounded: f64 = format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("scientific formatting of a finite float parses");
    format!("{rounded}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for line in &self.metadata {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.771_076_206_726_611, 9), "1.77107621");
        assert_eq!(format_sig(64.0, 9), "64");
        assert_eq!(format_sig(0.000_123_456_789_123, 4), "0.0001235");
        assert_eq!(format_sig(-2.7, 1), "-3");
        assert_eq!(format_sig(f64::NAN, 9), "NaN");
        let x = 0.1 + 0.2;
        assert_eq!(format_sig(x, 17).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new(["a", "b"]);
        t.metadata.push("seed=1".into());
        t.push(vec!["1".into(), "2".into()]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# seed=1\na,b\n1,2\n");
    }
}
