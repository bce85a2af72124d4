use std::io::{Read, Write};
use std::path::Path;

use super::dataset::{Cell, ColumnKind, ColumnSpec, CompletedDataset, MaskedDataset};
use crate::error::{Error, Result};

/// Per-column override of kind detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KindHint {
    Numeric,
    /// Categorical with levels in first-appearance order.
    Categorical,
    /// Categorical with a fixed level list; unknown tokens are rejected.
    Levels(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct ReadOptions {
    pub na_token: String,
    /// Indexed by column; `None` entries fall back to detection.
    pub schema_hint: Vec<Option<KindHint>>,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            na_token: "NA".to_string(),
            schema_hint: Vec::new(),
        }
    }
}

fn is_na(token: &str, na_token: &str) -> bool {
    token.is_empty() || token == na_token
}

fn parse_real(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|x| x.is_finite())
}

pub fn read_csv(path: impl AsRef<Path>, opts: &ReadOptions) -> Result<MaskedDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_csv_from(file, opts)
}

pub fn read_csv_from(reader: impl Read, opts: &ReadOptions) -> Result<MaskedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse { row: 0, msg: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let d = header.len();
    if d == 0 || (d == 1 && header[0].is_empty()) {
        return Err(Error::Parse { row: 0, msg: "missing header row".into() });
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); d];
    for (k, record) in rdr.records().enumerate() {
        // header is row 1 of the file
        let row = k + 2;
        let record = record.map_err(|e| Error::Parse { row, msg: e.to_string() })?;
        if record.len() != d {
            return Err(Error::Parse {
                row,
                msg: format!("expected {d} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            raw[j].push(field.to_string());
        }
    }
    if raw[0].is_empty() {
        return Err(Error::Ingestion("no data rows".into()));
    }

    let na = opts.na_token.as_str();
    let mut specs = Vec::with_capacity(d);
    let mut data = Vec::with_capacity(d);
    for (j, tokens) in raw.iter().enumerate() {
        let name = header[j].clone();
        let hint = opts.schema_hint.get(j).cloned().flatten();
        let all_real = tokens.iter().all(|t| is_na(t, na) || parse_real(t).is_some());
        let (kind, col) = match hint {
            Some(KindHint::Numeric) => {
                let col = tokens
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        if is_na(t, na) {
                            Ok(None)
                        } else {
                            parse_real(t).map(Some).ok_or_else(|| {
                                Error::Ingestion(format!("non-numeric `{t}` in numeric column `{name}` at row {}", i + 2))
                            })
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (ColumnKind::Numeric, col)
            }
            None if all_real => {
                let col = tokens
                    .iter()
                    .map(|t| if is_na(t, na) { None } else { parse_real(t) })
                    .collect();
                (ColumnKind::Numeric, col)
            }
            Some(KindHint::Levels(levels)) => {
                let col = tokens
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        if is_na(t, na) {
                            Ok(None)
                        } else {
                            levels.iter().position(|l| l == t).map(|l| Some(l as f64)).ok_or_else(|| {
                                Error::Ingestion(format!("unknown level `{t}` in column `{name}` at row {}", i + 2))
                            })
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (ColumnKind::Categorical(levels), col)
            }
            Some(KindHint::Categorical) | None => {
                let mut levels: Vec<String> = Vec::new();
                let col = tokens
                    .iter()
                    .map(|t| {
                        if is_na(t, na) {
                            return None;
                        }
                        let idx = levels.iter().position(|l| l == t).unwrap_or_else(|| {
                            levels.push(t.clone());
                            levels.len() - 1
                        });
                        Some(idx as f64)
                    })
                    .collect();
                if levels.is_empty() {
                    return Err(Error::Ingestion(format!("column `{name}` is entirely missing")));
                }
                (ColumnKind::Categorical(levels), col)
            }
        };
        specs.push(ColumnSpec { name, kind });
        data.push(col);
    }
    MaskedDataset::from_columns(specs, data)
}

/// Anything that can be written as a CSV table.
pub trait CsvTable {
    fn csv_columns(&self) -> &[ColumnSpec];
    fn csv_n_rows(&self) -> usize;
    fn csv_cell(&self, i: usize, j: usize) -> Cell;
}

impl CsvTable for MaskedDataset {
    fn csv_columns(&self) -> &[ColumnSpec] {
        self.columns()
    }
    fn csv_n_rows(&self) -> usize {
        self.n_rows()
    }
    fn csv_cell(&self, i: usize, j: usize) -> Cell {
        self.cell(i, j)
    }
}

impl CsvTable for CompletedDataset {
    fn csv_columns(&self) -> &[ColumnSpec] {
        self.columns()
    }
    fn csv_n_rows(&self) -> usize {
        self.n_rows()
    }
    fn csv_cell(&self, i: usize, j: usize) -> Cell {
        self.cell(i, j)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv_to(table: &impl CsvTable, writer: impl Write, na_token: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io("writing csv", e),
        other => Error::io("writing csv", std::io::Error::other(format!("{other:?}"))),
    };
    let cols = table.csv_columns();
    wtr.write_record(cols.iter().map(|c| c.name.as_str())).map_err(to_io)?;
    let mut record: Vec<String> = Vec::with_capacity(cols.len());
    for i in 0..table.csv_n_rows() {
        record.clear();
        for (j, spec) in cols.iter().enumerate() {
            record.push(match (table.csv_cell(i, j), &spec.kind) {
                (Cell::Missing, _) => na_token.to_string(),
                (Cell::Level(l), ColumnKind::Categorical(levels)) => levels[l].clone(),
                (cell, _) => format_real(cell.as_f64().unwrap_or(f64::NAN)),
            });
        }
        wtr.write_record(&record).map_err(to_io)?;
    }
    wtr.flush().map_err(|e| Error::io("flushing csv", e))?;
    Ok(())
}

pub fn write_csv(table: &impl CsvTable, path: impl AsRef<Path>, na_token: &str) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_csv_to(table, std::io::BufWriter::new(file), na_token).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(format!("writing {}", path.display()), source),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TINY: &str = "Age,Income,Gender\n33,NA,F\n18,12000,NA\nNA,13542,M\n";

    fn read_str(s: &str) -> Result<MaskedDataset> {
        read_csv_from(s.as_bytes(), &ReadOptions::default())
    }

    fn write_str(ds: &impl CsvTable) -> String {
        let mut buf = Vec::new();
        write_csv_to(ds, &mut buf, "NA").unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn reads_figure_one_table() {
        let ds = read_str(TINY).unwrap();
        assert_eq!(ds.mask_of(), vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert!(ds.kind(0).is_numeric());
        assert!(ds.kind(1).is_numeric());
        assert_eq!(ds.kind(2), &ColumnKind::Categorical(vec!["F".into(), "M".into()]));
        assert_eq!(ds.cell(0, 0), Cell::Num(33.0));
        assert_eq!(ds.cell(2, 2), Cell::Level(1));
    }

    #[test]
    fn no_na_tokens_means_empty_mask() {
        let ds = read_str("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(ds.total_missing(), 0);
    }

    #[test]
    fn empty_field_is_missing() {
        let ds = read_str("a,b\n1,\n3,4\n").unwrap();
        assert!(ds.is_missing(0, 1));
    }

    #[test]
    fn custom_na_token() {
        let opts = ReadOptions { na_token: "?".into(), ..Default::default() };
        let ds = read_csv_from("a,b\n1,?\n3,4\n".as_bytes(), &opts).unwrap();
        assert!(ds.is_missing(0, 1));
    }

    #[test]
    fn all_na_column_rejected() {
        let err = read_str("a,b,c\n1,NA,2\n3,NA,4\n").unwrap_err();
        assert!(matches!(err, Error::Ingestion(_)), "{err}");
    }

    #[test]
    fn ragged_row_reports_row_number() {
        let err = read_str("a,b\n1,2\n3\n").unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn schema_hints() {
        let opts = ReadOptions {
            schema_hint: vec![Some(KindHint::Categorical), Some(KindHint::Levels(vec!["x".into(), "y".into()]))],
            ..Default::default()
        };
        let ds = read_csv_from("a,b\n2,y\n1,x\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.kind(0), &ColumnKind::Categorical(vec!["2".into(), "1".into()]));
        assert_eq!(ds.cell(0, 1), Cell::Level(1));

        let err = read_csv_from("a,b\n2,z\n1,x\n".as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::Ingestion(_)));
    }

    #[test]
    fn quoted_fields() {
        let ds = read_str("name,v\n\"a, b\",1\n\"c\"\"d\",2\n").unwrap();
        assert_eq!(ds.kind(0), &ColumnKind::Categorical(vec!["a, b".into(), "c\"d".into()]));
        let back = read_str(&write_str(&ds)).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn round_trip_examples() {
        for text in [TINY, "a,b\n1,2\n3,4\n", "a,b\n0.1,NA\n1e-300,-2.5\n"] {
            let ds = read_str(text).unwrap();
            let back = read_str(&write_str(&ds)).unwrap();
            assert_eq!(back.mask_of(), ds.mask_of());
            assert_eq!(back.columns(), ds.columns());
            for j in 0..ds.n_cols() {
                for i in 0..ds.n_rows() {
                    assert_eq!(back.cell(i, j), ds.cell(i, j));
                }
            }
        }
    }

    #[test]
    fn write_to_bad_path_names_it() {
        let ds = read_str(TINY).unwrap();
        let err = write_csv(&ds, "/nonexistent-dir/x.csv", "NA").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }

    fn token() -> impl Strategy<Value = Option<String>> {
        prop_oneof![
            1 => Just(None),
            3 => any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(|x| Some(format!("{x}"))),
        ]
    }

    fn level_token() -> impl Strategy<Value = Option<String>> {
        prop_oneof![1 => Just(None), 3 => "[a-z]{1,3}( [a-z])?".prop_map(Some)]
    }

    proptest! {
        #[test]
        fn read_write_read_is_identity(
            rows in prop::collection::vec((token(), level_token(), token()), 1..25)
        ) {
            let mut text = String::from("x,\"g,1\",y\n");
            for (a, g, b) in &rows {
                let f = |t: &Option<String>| t.clone().unwrap_or_else(|| "NA".into());
                text.push_str(&format!("{},\"{}\",{}\n", f(a), f(g), f(b)));
            }
            let Ok(first) = read_str(&text) else { return Ok(()); };
            let second = read_str(&write_str(&first)).unwrap();
            prop_assert_eq!(second, first);
        }
    }
}
