//! Feature tables on disk: CSV with a header row. An `id` column and a
//! `rating` column are recognized by name; every other column is a feature.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::extract::{feature_schema, FeatureVector, SCHEMA_VERSION};
use crate::error::{Error, FeatureError};

pub const ID_COLUMN: &str = "id";
pub const RATING_COLUMN: &str = "rating";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub ratings: Option<Vec<f64>>,
}

/// Schema tag for a list of column names: the theme schema version when the
/// names match it, otherwise a tag derived from the dimension.
pub fn schema_tag(names: &[String]) -> String {
    if names == feature_schema() {
        SCHEMA_VERSION.to_string()
    } else {
        format!("custom-{}d", names.len())
    }
}

impl FeatureTable {
    pub fn new(names: Vec<String>) -> Self {
        FeatureTable {
            names,
            ids: Vec::new(),
            rows: Vec::new(),
            ratings: None,
        }
    }

    /// Empty table over the theme feature schema.
    pub fn themes() -> Self {
        Self::new(feature_schema().to_vec())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn schema_version(&self) -> String {
        schema_tag(&self.names)
    }

    pub fn push(
        &mut self,
        id: impl Into<String>,
        row: Vec<f64>,
        rating: Option<f64>,
    ) -> Result<(), FeatureError> {
        if row.len() != self.names.len() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.names.len(),
                got: row.len(),
            });
        }
        match (&mut self.ratings, rating) {
            (Some(r), Some(v)) => r.push(v),
            (None, None) => {}
            (None, Some(v)) if self.rows.is_empty() => self.ratings = Some(vec![v]),
            _ => {
                return Err(FeatureError::BadTable(
                    "rows must all have ratings or none".into(),
                ))
            }
        }
        self.ids.push(id.into());
        self.rows.push(row);
        Ok(())
    }

    pub fn push_vector(
        &mut self,
        id: impl Into<String>,
        v: &FeatureVector,
        rating: Option<f64>,
    ) -> Result<(), FeatureError> {
        let version = self.schema_version();
        if v.schema_version != version {
            return Err(FeatureError::SchemaMismatch {
                expected: version,
                got: v.schema_version.clone(),
            });
        }
        self.push(id, v.values.clone(), rating)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), Error> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        let mut header = vec![ID_COLUMN.to_string()];
        header.extend(self.names.iter().cloned());
        if self.ratings.is_some() {
            header.push(RATING_COLUMN.to_string());
        }
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec = vec![self.ids[i].clone()];
            // shortest round-trip formatting keeps values bit-exact
            rec.extend(row.iter().map(|v| v.to_string()));
            if let Some(r) = &self.ratings {
                rec.push(r[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, Error> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let id_col = header.iter().position(|h| h == ID_COLUMN);
        let rating_col = header.iter().position(|h| h == RATING_COLUMN);
        let feature_cols: Vec<usize> = (0..header.len())
            .filter(|&c| Some(c) != id_col && Some(c) != rating_col)
            .collect();
        if feature_cols.is_empty() {
            return Err(
                FeatureError::BadTable(format!("{}: no feature columns", path.display())).into(),
            );
        }
        let mut table =
            FeatureTable::new(feature_cols.iter().map(|&c| header[c].clone()).collect());
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |c: usize| -> Result<f64, Error> {
                let s = rec.get(c).unwrap_or("").trim();
                s.parse::<f64>().map_err(|_| {
                    FeatureError::BadTable(format!(
                        "{}: row {} column {:?}: not a number: {s:?}",
                        path.display(),
                        line + 1,
                        header[c]
                    ))
                    .into()
                })
            };
            let row = feature_cols
                .iter()
                .map(|&c| parse(c))
                .collect::<Result<Vec<_>, _>>()?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(FeatureError::NonFinite.into());
            }
            let id = match id_col {
                Some(c) => rec.get(c).unwrap_or("").to_string(),
                None => format!("row{line}"),
            };
            let rating = rating_col.map(parse).transpose()?;
            table.push(id, row, rating)?;
        }
        Ok(table)
    }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Csv(e);
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => unreachable!("checked above"),
    }
}
