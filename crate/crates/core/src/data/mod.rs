//! Datasets with missing values: masks, patterns, column statistics, CSV.

mod csv_io;
mod dataset;

pub use csv_io::{format_real, read_csv, read_csv_from, write_csv, write_csv_to, CsvTable, KindHint, ReadOptions};
pub use dataset::{
    Cell, ColumnKind, ColumnSpec, ColumnStats, CompletedDataset, MaskedDataset, PatternGroup, PatternTable,
};
pub(crate) use dataset::mode_of;
