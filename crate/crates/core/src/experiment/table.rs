//! Result tables and their CSV / JSON encodings.

use std::io::Write;

use serde::Serialize;

use super::config::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    /// Empty for dimensionless columns.
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: &str) -> Self {
        Column {
            name: name.into(),
            unit: unit.to_string(),
        }
    }

    fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{}[{}]", self.name, self.unit)
        }
    }
}

/// Metadata embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub generator: String,
    pub version: String,
    /// Unix seconds; taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
    pub protocol: String,
    pub table: String,
    /// Fully resolved run config (TOML).
    pub config: String,
}

impl Metadata {
    pub fn timestamp_now() -> u64 {
        if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok())
        {
            return t;
        }
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// Suffix appended to the output stem; empty for the main table.
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        ResultTable {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| Some(x)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn file_name(&self, stem: &str, format: Format) -> String {
        if self.name.is_empty() {
            format!("{stem}.{}", format.extension())
        } else {
            format!("{stem}_{}.{}", self.name, format.extension())
        }
    }

    /// Just the header and rows, without metadata: the part that must be
    /// reproducible byte for byte.
    pub fn numeric_payload(&self) -> String {
        let mut out = Vec::new();
        self.write_csv_body(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("csv output is utf-8")
    }

    fn write_csv_body<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(self.columns.iter().map(Column::header))?;
        for row in &self.rows {
            csv.write_record(row.iter().map(|x| x.map(|v| v.to_string()).unwrap_or_default()))?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, meta: &Metadata, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# generator: {} {}", meta.generator, meta.version)?;
        writeln!(w, "# timestamp: {}", meta.timestamp)?;
        writeln!(w, "# protocol: {}", meta.protocol)?;
        if !meta.table.is_empty() {
            writeln!(w, "# table: {}", meta.table)?;
        }
        writeln!(w, "# config:")?;
        for line in meta.config.lines() {
            writeln!(w, "#   {line}")?;
        }
        self.write_csv_body(w)
    }

    pub fn write_json<W: Write>(&self, meta: &Metadata, w: W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: &'a Metadata,
            columns: &'a [Column],
            rows: &'a [Vec<Option<f64>>],
        }
        let doc = Doc {
            metadata: meta,
            columns: &self.columns,
            rows: &self.rows,
        };
        serde_json::to_writer_pretty(w, &doc).map_err(std::io::Error::other)
    }

    pub fn write<W: Write>(&self, meta: &Metadata, format: Format, w: W) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(meta, w),
            Format::Json => self.write_json(meta, w),
        }
    }
}
