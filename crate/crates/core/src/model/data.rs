use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One followed-up individual.
///
/// Missing covariates are `None`; they contribute nothing to the likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: String,
    /// Exit time `min(T, W)`.
    pub time: f64,
    /// `true` when the event was observed before censoring.
    pub event: bool,
    /// Left-truncation time; 0 when followed from the origin.
    pub entry: f64,
    pub x_cont: Vec<Option<f64>>,
    pub x_cat: Vec<Option<usize>>,
    /// Non-exposed individuals join the structural zero-risk cluster.
    pub exposed: bool,
}

impl Individual {
    pub fn has_any_exposure(&self) -> bool {
        self.x_cont.iter().any(Option::is_some) || self.x_cat.iter().any(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub individuals: Vec<Individual>,
    pub n_continuous: usize,
    pub n_categorical: usize,
    pub modality_counts: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn n_exposed(&self) -> usize {
        self.individuals.iter().filter(|ind| ind.exposed).count()
    }
}

/// Checks every record invariant and returns the dataset unchanged on success.
///
/// The first violation found is reported with the offending record id.
pub fn validate_dataset(raw: Dataset) -> Result<Dataset> {
    if raw.individuals.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if raw.modality_counts.len() != raw.n_categorical {
        return Err(Error::Config(format!(
            "{} modality counts declared for {} categorical variables",
            raw.modality_counts.len(),
            raw.n_categorical
        )));
    }
    if let Some(j) = raw.modality_counts.iter().position(|&m| m == 0) {
        return Err(Error::Config(format!(
            "categorical variable {j} declares zero modalities"
        )));
    }
    let mut seen = HashSet::with_capacity(raw.individuals.len());
    for ind in &raw.individuals {
        validate_individual(ind, &raw)?;
        if !seen.insert(ind.id.as_str()) {
            return Err(Error::DuplicateId { id: ind.id.clone() });
        }
    }
    Ok(raw)
}

fn validate_individual(ind: &Individual, ds: &Dataset) -> Result<()> {
    let id = || ind.id.clone();
    if ind.x_cont.len() != ds.n_continuous || ind.x_cat.len() != ds.n_categorical {
        return Err(Error::ShapeMismatch {
            id: id(),
            expected_cont: ds.n_continuous,
            expected_cat: ds.n_categorical,
        });
    }
    if !(ind.time > 0.0) || !ind.time.is_finite() {
        return Err(Error::NonPositiveTime { id: id() });
    }
    if !(ind.entry >= 0.0) || ind.entry >= ind.time {
        return Err(Error::EntryAfterExit { id: id() });
    }
    for (index, x) in ind.x_cont.iter().enumerate() {
        if let Some(x) = *x {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::NegativeContinuousExposure { id: id(), index });
            }
        }
    }
    for (index, (x, &m)) in ind.x_cat.iter().zip(&ds.modality_counts).enumerate() {
        if let Some(value) = *x {
            if value >= m {
                return Err(Error::BadCategoryIndex {
                    id: id(),
                    index,
                    value,
                });
            }
        }
    }
    Ok(())
}
