//! CSV persistence of datasets and simulation ground truth.
//!
//! Dataset columns: `id,y,delta,entry,cont_1..cont_K,cat_1..cat_J,exposed`.
//! An empty covariate field means the value is absent.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{validate_dataset, Dataset, Individual};
use crate::simgen::TruthRecord;

pub fn write_dataset_csv<W: Write>(out: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "y".into(), "delta".into(), "entry".into()];
    header.extend((1..=data.n_continuous).map(|k| format!("cont_{k}")));
    header.extend((1..=data.n_categorical).map(|j| format!("cat_{j}")));
    header.push("exposed".into());
    w.write_record(&header)?;
    for ind in &data.individuals {
        let mut row = vec![
            ind.id.clone(),
            ind.time.to_string(),
            (ind.event as u8).to_string(),
            ind.entry.to_string(),
        ];
        row.extend(ind.x_cont.iter().map(|x| x.map_or(String::new(), |v| v.to_string())));
        row.extend(ind.x_cat.iter().map(|x| x.map_or(String::new(), |v| v.to_string())));
        row.push((ind.exposed as u8).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(id: &str, column: &str, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("record {id}, column {column}: {e}")))
}

fn parse_flag(id: &str, column: &str, field: &str) -> Result<bool> {
    match field.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::Parse(format!("record {id}, column {column}: expected 0/1, got {other:?}"))),
    }
}

/// Reads and validates a dataset. Modality counts default to one more than
/// the largest category observed in each categorical column.
pub fn read_dataset_csv<R: Read>(input: R, modality_counts: Option<&[usize]>) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols.len() < 5 || cols[..4] != ["id", "y", "delta", "entry"] || cols.last() != Some(&"exposed") {
        return Err(Error::Parse(
            "header must be id,y,delta,entry,cont_*,cat_*,exposed".into(),
        ));
    }
    let middle = &cols[4..cols.len() - 1];
    let k = middle.iter().take_while(|c| c.starts_with("cont_")).count();
    let j = middle.len() - k;
    if middle[k..].iter().any(|c| !c.starts_with("cat_")) {
        return Err(Error::Parse("continuous columns must precede categorical ones".into()));
    }
    let mut individuals = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or("").trim().to_string();
        let field = |c: usize| rec.get(c).unwrap_or("");
        let optional = |c: usize| {
            let f = field(c).trim();
            (!f.is_empty()).then_some(f)
        };
        let x_cont = (0..k)
            .map(|c| optional(4 + c).map(|f| parse_field(&id, cols[4 + c], f)).transpose())
            .collect::<Result<Vec<Option<f64>>>>()?;
        let x_cat = (0..j)
            .map(|c| optional(4 + k + c).map(|f| parse_field(&id, cols[4 + k + c], f)).transpose())
            .collect::<Result<Vec<Option<usize>>>>()?;
        individuals.push(Individual {
            time: parse_field(&id, "y", field(1))?,
            event: parse_flag(&id, "delta", field(2))?,
            entry: parse_field(&id, "entry", field(3))?,
            exposed: parse_flag(&id, "exposed", field(4 + k + j))?,
            x_cont,
            x_cat,
            id,
        });
    }
    let modality_counts = match modality_counts {
        Some(m) => m.to_vec(),
        None => (0..j)
            .map(|c| {
                individuals
                    .iter()
                    .filter_map(|ind| ind.x_cat[c])
                    .max()
                    .map_or(1, |m| m + 1)
            })
            .collect(),
    };
    validate_dataset(Dataset {
        individuals,
        n_continuous: k,
        n_categorical: j,
        modality_counts,
    })
}

pub fn write_truth_csv<W: Write>(out: W, truth: &[TruthRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in truth {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth_csv<R: Read>(input: R) -> Result<Vec<TruthRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Ground truth reordered to follow the dataset, matched by id.
pub fn align_truth(data: &Dataset, truth: &[TruthRecord]) -> Result<Vec<TruthRecord>> {
    let by_id: std::collections::HashMap<&str, &TruthRecord> =
        truth.iter().map(|t| (t.id.as_str(), t)).collect();
    if by_id.len() != data.len() || truth.len() != data.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: data.len() });
    }
    data.individuals
        .iter()
        .map(|ind| {
            by_id
                .get(ind.id.as_str())
                .map(|t| (*t).clone())
                .ok_or_else(|| Error::Parse(format!("no ground truth for record {}", ind.id)))
        })
        .collect()
}
