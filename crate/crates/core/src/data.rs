//! Points, datasets and the CSV dataset format.
//!
//! CSV header: `id,feat_0..feat_{n-1}[,z_0..z_{m-1}][,label][,score]`. A
//! `score` column, when present, defines a tabular scorer.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::StochasticScorer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: String,
    pub features: Vec<f64>,
    /// Features the fairness metric (and LSH) look at, when separate from the
    /// inference features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness_features: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

impl Point {
    pub fn new(id: impl Into<String>, features: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            features,
            fairness_features: None,
            label: None,
        }
    }

    pub fn with_fairness_features(mut self, z: Vec<f64>) -> Self {
        self.fairness_features = Some(z);
        self
    }

    pub fn with_label(mut self, y: u8) -> Self {
        self.label = Some(y);
        self
    }

    /// The vector fairness metrics and LSH families operate on.
    pub fn fairness_view(&self) -> &[f64] {
        self.fairness_features.as_deref().unwrap_or(&self.features)
    }

    fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::InvalidData(format!("point `{}` has no features", self.id)));
        }
        let all = self.features.iter().chain(self.fairness_features.iter().flatten());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "point `{}` has a non-finite feature",
                self.id
            )));
        }
        if let Some(y) = self.label {
            if y > 1 {
                return Err(Error::InvalidData(format!("point `{}` has label {y}", self.id)));
            }
        }
        Ok(())
    }
}

/// An ordered list of points with unique ids and uniform dimensions. Audits
/// treat it as the uniform distribution over its points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<Point>,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let mut index = HashMap::with_capacity(points.len());
        if let Some(first) = points.first() {
            let dim = first.features.len();
            let zdim = first.fairness_features.as_ref().map(Vec::len);
            for p in &points {
                p.validate()?;
                if p.features.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.features.len(),
                    });
                }
                let this_z = p.fairness_features.as_ref().map(Vec::len);
                if this_z != zdim {
                    return Err(Error::DimensionMismatch {
                        expected: zdim.unwrap_or(0),
                        found: this_z.unwrap_or(0),
                    });
                }
            }
        }
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        Ok(Self { points, index })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Point> {
        self.index.get(id).map(|&i| &self.points[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.features.len())
    }

    pub fn fairness_dim(&self) -> Option<usize> {
        self.points
            .first()
            .and_then(|p| p.fairness_features.as_ref().map(Vec::len))
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<(Self, Option<StochasticScorer>)> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    /// Parse the CSV format; returns the tabular scorer when a `score` column exists.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<(Self, Option<StochasticScorer>)> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let layout = Layout::parse(&headers)?;
        let mut points = Vec::new();
        let mut scores = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                let raw = record.get(i).unwrap_or("");
                raw.parse::<f64>().map_err(|_| {
                    Error::InvalidData(format!(
                        "row {}: column `{}` is not a number: `{raw}`",
                        row + 1,
                        &headers[i]
                    ))
                })
            };
            let id = record.get(layout.id).unwrap_or("").to_string();
            let features = layout.feats.iter().map(|&i| field(i)).collect::<Result<Vec<_>>>()?;
            let mut p = Point::new(id, features);
            if !layout.zs.is_empty() {
                p.fairness_features =
                    Some(layout.zs.iter().map(|&i| field(i)).collect::<Result<Vec<_>>>()?);
            }
            if let Some(i) = layout.label {
                let y = field(i)?;
                if y != 0.0 && y != 1.0 {
                    return Err(Error::InvalidData(format!("row {}: label {y} is not 0/1", row + 1)));
                }
                p.label = Some(y as u8);
            }
            if let Some(i) = layout.score {
                scores.push((p.id.clone(), field(i)?));
            }
            points.push(p);
        }
        let ds = Dataset::new(points)?;
        let scorer = match layout.score {
            Some(_) => Some(StochasticScorer::tabular(scores)?),
            None => None,
        };
        Ok((ds, scorer))
    }

    pub fn write_csv<W: Write>(&self, writer: W, scorer: Option<&StochasticScorer>) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend((0..self.dim()).map(|i| format!("feat_{i}")));
        if let Some(m) = self.fairness_dim() {
            header.extend((0..m).map(|i| format!("z_{i}")));
        }
        let has_label = self.points.first().is_some_and(|p| p.label.is_some());
        if has_label {
            header.push("label".into());
        }
        if scorer.is_some() {
            header.push("score".into());
        }
        w.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![p.id.clone()];
            row.extend(p.features.iter().map(f64::to_string));
            if let Some(z) = &p.fairness_features {
                row.extend(z.iter().map(f64::to_string));
            }
            if has_label {
                row.push(p.label.unwrap_or(0).to_string());
            }
            if let Some(s) = scorer {
                row.push(s.score(p)?.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Layout {
    id: usize,
    feats: Vec<usize>,
    zs: Vec<usize>,
    label: Option<usize>,
    score: Option<usize>,
}

impl Layout {
    fn parse(headers: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| headers.iter().position(|h| h == name);
        let id = find("id").ok_or_else(|| Error::MissingColumn("id".into()))?;
        let indexed = |prefix: &str| -> Result<Vec<usize>> {
            let mut cols = Vec::new();
            while let Some(i) = find(&format!("{prefix}{}", cols.len())) {
                cols.push(i);
            }
            let stray = headers.iter().filter(|h| h.starts_with(prefix)).count();
            if stray != cols.len() {
                return Err(Error::InvalidData(format!(
                    "`{prefix}*` columns must be numbered contiguously from 0"
                )));
            }
            Ok(cols)
        };
        let feats = indexed("feat_")?;
        if feats.is_empty() {
            return Err(Error::MissingColumn("feat_0".into()));
        }
        Ok(Self {
            id,
            feats,
            zs: indexed("z_")?,
            label: find("label"),
            score: find("score"),
        })
    }
}
