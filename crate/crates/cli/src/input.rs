//! One numeric column out of a CSV file.

use std::path::Path;

use crate::CliError;

/// Fewest finite values accepted from a file.
pub const MIN_ROWS: usize = 10;

/// Column selector: a header name, or a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Position(usize),
}

impl std::str::FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s.parse::<usize>() {
            Ok(0) => Err("column positions start at 1".into()),
            Ok(i) => Ok(Column::Position(i)),
            Err(_) if s.is_empty() => Err("empty column name".into()),
            Err(_) => Ok(Column::Name(s.to_owned())),
        }
    }
}

impl Default for Column {
    fn default() -> Self {
        Column::Position(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnData {
    /// Header name when the file has one, else `column N`.
    pub label: String,
    pub values: Vec<f64>,
    /// Rows skipped because the field was missing, unparsable or non-finite.
    pub dropped: usize,
}

fn is_header(record: &csv::StringRecord) -> bool {
    record
        .iter()
        .map(str::trim)
        .any(|f| !f.is_empty() && f.parse::<f64>().is_err())
}

/// Reads `column` from `path`. The first line is a header if any of its
/// fields is non-numeric.
pub fn read_column(path: &Path, column: &Column) -> Result<ColumnData, CliError> {
    let shown = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{shown}: {e}")))?;
    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| CliError::Data(format!("{shown}: {e}")))?,
        None => return Err(CliError::Data(format!("{shown}: file is empty"))),
    };
    let header = is_header(&first).then(|| first.clone());

    let index = match (column, &header) {
        (Column::Position(i), _) => i - 1,
        (Column::Name(name), Some(h)) => h.iter().position(|f| f == name).ok_or_else(|| {
            CliError::Data(format!(
                "{shown}: no column named `{name}` (columns: {})",
                h.iter().collect::<Vec<_>>().join(", ")
            ))
        })?,
        (Column::Name(name), None) => {
            return Err(CliError::Data(format!(
                "{shown}: no header line, so column `{name}` cannot be found; use a position"
            )))
        }
    };
    let width = first.len();
    if index >= width {
        return Err(CliError::Data(format!(
            "{shown}: column {} requested but the first line has {width} field(s)",
            index + 1
        )));
    }
    let label = match &header {
        Some(h) => h[index].to_owned(),
        None => format!("column {}", index + 1),
    };

    let mut values = Vec::new();
    let mut dropped = 0;
    let data_rows = header.is_none().then_some(Ok(first)).into_iter().chain(records);
    for record in data_rows {
        let record = record.map_err(|e| CliError::Data(format!("{shown}: {e}")))?;
        match record.get(index).and_then(|f| f.parse::<f64>().ok()) {
            Some(v) if v.is_finite() => values.push(v),
            _ => dropped += 1,
        }
    }
    if values.len() < MIN_ROWS {
        return Err(CliError::Data(format!(
            "{shown}: column `{label}` has {} finite value(s); at least {MIN_ROWS} are required",
            values.len()
        )));
    }
    Ok(ColumnData {
        label,
        values,
        dropped,
    })
}
