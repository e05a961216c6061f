//! CSV ingestion and emission for panels, with columns mapped by name.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{PanelDataset, PanelObservation};
use super::geo::GeoPoint;
use crate::error::{Error, Result};

/// Maps panel fields to CSV header names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub region: String,
    pub country: String,
    pub year: String,
    pub outcome: String,
    #[serde(default)]
    pub predictors: Vec<String>,
    #[serde(default)]
    pub lat: Option<String>,
    #[serde(default)]
    pub lon: Option<String>,
    /// Columns holding semicolon-separated group tags.
    #[serde(default)]
    pub groups: Vec<String>,
    /// Extra string columns kept verbatim (usable as custom cluster keys).
    #[serde(default)]
    pub extra: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl ColumnMapping {
    /// Mapping with conventional header names and the given predictors.
    pub fn standard(predictors: &[&str]) -> Self {
        ColumnMapping {
            region: "region".into(),
            country: "country".into(),
            year: "year".into(),
            outcome: "outcome".into(),
            predictors: predictors.iter().map(|s| s.to_string()).collect(),
            lat: Some("lat".into()),
            lon: Some("lon".into()),
            groups: vec!["groups".into()],
            extra: Vec::new(),
            delimiter: ',',
        }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .map_err(|_| Error::invalid(format!("delimiter `{}` is not ASCII", self.delimiter)))
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "NA"
}

pub fn load_csv(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<PanelDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, mapping)
}

pub fn read_csv<R: Read>(reader: R, mapping: &ColumnMapping) -> Result<PanelDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter_byte()?)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let region_i = col(&mapping.region)?;
    let country_i = col(&mapping.country)?;
    let year_i = col(&mapping.year)?;
    let outcome_i = col(&mapping.outcome)?;
    let pred_i: Vec<usize> = mapping.predictors.iter().map(|p| col(p)).collect::<Result<_>>()?;
    let lat_i = mapping.lat.as_deref().map(col).transpose()?;
    let lon_i = mapping.lon.as_deref().map(col).transpose()?;
    let group_i: Vec<usize> = mapping.groups.iter().map(|g| col(g)).collect::<Result<_>>()?;
    let extra_i: Vec<usize> = mapping.extra.iter().map(|g| col(g)).collect::<Result<_>>()?;

    let mut observations = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let cell = |i: usize| record.get(i).unwrap_or("");
        let number = |i: usize, column: &str| -> Result<Option<f64>> {
            let raw = cell(i);
            if is_missing(raw) {
                return Ok(None);
            }
            raw.trim().parse::<f64>().map(Some).map_err(|_| Error::Parse {
                row,
                column: column.to_string(),
                value: raw.to_string(),
            })
        };

        let year_raw = cell(year_i);
        let year = year_raw.trim().parse::<i32>().map_err(|_| Error::Parse {
            row,
            column: mapping.year.clone(),
            value: year_raw.to_string(),
        })?;
        let outcome = number(outcome_i, &mapping.outcome)?;
        let predictors = pred_i
            .iter()
            .zip(&mapping.predictors)
            .map(|(&i, name)| number(i, name))
            .collect::<Result<Vec<_>>>()?;

        let centroid = match (lat_i, lon_i) {
            (Some(la), Some(lo)) => {
                let lat = number(la, mapping.lat.as_deref().unwrap_or_default())?;
                let lon = number(lo, mapping.lon.as_deref().unwrap_or_default())?;
                match (lat, lon) {
                    (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon)?),
                    (None, None) => None,
                    _ => {
                        return Err(Error::Parse {
                            row,
                            column: "lat/lon".into(),
                            value: format!("{} / {}", cell(la), cell(lo)),
                        })
                    }
                }
            }
            _ => None,
        };

        let groups: BTreeSet<String> = group_i
            .iter()
            .flat_map(|&i| cell(i).split(';'))
            .map(str::trim)
            .filter(|t| !t.is_empty() && *t != "NA")
            .map(String::from)
            .collect();

        let extra: BTreeMap<String, String> = extra_i
            .iter()
            .zip(&mapping.extra)
            .filter(|(&i, _)| !is_missing(cell(i)))
            .map(|(&i, name)| (name.clone(), cell(i).trim().to_string()))
            .collect();

        observations.push(PanelObservation {
            region_id: cell(region_i).trim().to_string(),
            country_id: cell(country_i).trim().to_string(),
            year,
            outcome,
            predictors,
            centroid,
            groups,
            extra,
        });
    }

    PanelDataset::new(mapping.predictors.clone(), observations)
}

pub fn save_csv(dataset: &PanelDataset, path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(dataset, file, mapping)
}

/// Writes the panel using the mapping's header names. Group tags from all
/// tag columns are joined into the first mapped group column.
pub fn write_csv<W: Write>(dataset: &PanelDataset, writer: W, mapping: &ColumnMapping) -> Result<()> {
    if mapping.predictors != dataset.predictor_names() {
        return Err(Error::invalid("mapping predictors differ from the dataset's predictor list"));
    }
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(mapping.delimiter_byte()?)
        .from_writer(writer);

    let coords = mapping.lat.as_ref().zip(mapping.lon.as_ref());
    let mut header = vec![
        mapping.region.clone(),
        mapping.country.clone(),
        mapping.year.clone(),
        mapping.outcome.clone(),
    ];
    header.extend(mapping.predictors.iter().cloned());
    if let Some((lat, lon)) = coords {
        header.push(lat.clone());
        header.push(lon.clone());
    }
    header.extend(mapping.groups.first().cloned());
    header.extend(mapping.extra.iter().cloned());
    wtr.write_record(&header)?;

    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    for obs in dataset.observations() {
        let mut rec = vec![
            obs.region_id.clone(),
            obs.country_id.clone(),
            obs.year.to_string(),
            fmt(obs.outcome),
        ];
        rec.extend(obs.predictors.iter().map(|&v| fmt(v)));
        if coords.is_some() {
            rec.push(fmt(obs.centroid.map(|c| c.lat)));
            rec.push(fmt(obs.centroid.map(|c| c.lon)));
        }
        if !mapping.groups.is_empty() {
            rec.push(obs.groups.iter().cloned().collect::<Vec<_>>().join(";"));
        }
        for name in &mapping.extra {
            rec.push(obs.extra.get(name).cloned().unwrap_or_else(|| "NA".into()));
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
