//! Fixed-proportion subsampling of entailment-labeled corpora.
//!
//! Metrics disagree most on divergent references, so meta-evaluation
//! sweeps the fraction of entailed instances: each requested proportion
//! gets a same-sized slice drawn without replacement from the labeled
//! pools.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

/// One subsampled slice: the requested entailed proportion and the
/// drawn instance ids, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionSlice {
    pub proportion: f64,
    pub instance_ids: Vec<String>,
}

/// Draws one slice of `slice_size` instances per requested proportion.
///
/// A proportion `p` translates to `round(p * slice_size)` instances
/// drawn from the entailed pool and the rest from the divergent pool,
/// each without replacement. Slice `k` draws from RNG stream `k + 1`
/// of the seed, so a run is reproducible and adding a proportion does
/// not reshuffle earlier slices.
///
/// Errors when a pool is too small for some slice, the slice size is
/// zero, or a proportion falls outside `[0, 1]`.
pub fn entailed_proportion_slices(
    labels: &BTreeMap<String, bool>,
    proportions: &[f64],
    slice_size: usize,
    seed: u64,
) -> Result<Vec<ProportionSlice>> {
    if slice_size == 0 {
        return Err(Error::InvalidInput(
            "slice size must be positive".to_string(),
        ));
    }
    let entailed: Vec<&String> = labels
        .iter()
        .filter(|(_, &e)| e)
        .map(|(id, _)| id)
        .collect();
    let divergent: Vec<&String> = labels
        .iter()
        .filter(|(_, &e)| !e)
        .map(|(id, _)| id)
        .collect();

    let mut slices = Vec::with_capacity(proportions.len());
    for (k, &proportion) in proportions.iter().enumerate() {
        if !(0.0..=1.0).contains(&proportion) {
            return Err(Error::InvalidInput(format!(
                "proportion must lie in [0, 1], got {proportion}"
            )));
        }
        let n_entailed = (proportion * slice_size as f64).round() as usize;
        let n_divergent = slice_size - n_entailed;
        if n_entailed > entailed.len() {
            return Err(Error::InvalidInput(format!(
                "proportion {proportion} needs {n_entailed} entailed instances, \
                 only {} are labeled",
                entailed.len()
            )));
        }
        if n_divergent > divergent.len() {
            return Err(Error::InvalidInput(format!(
                "proportion {proportion} needs {n_divergent} divergent instances, \
                 only {} are labeled",
                divergent.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64 + 1);
        let mut instance_ids: Vec<String> =
            rand::seq::index::sample(&mut rng, entailed.len(), n_entailed)
                .iter()
                .map(|i| entailed[i].clone())
                .collect();
        instance_ids.extend(
            rand::seq::index::sample(&mut rng, divergent.len(), n_divergent)
                .iter()
                .map(|i| divergent[i].clone()),
        );
        instance_ids.sort();
        slices.push(ProportionSlice {
            proportion,
            instance_ids,
        });
    }
    Ok(slices)
}

#[derive(Deserialize)]
struct RawLabel {
    instance_id: String,
    entailed: bool,
}

/// Loads `{"instance_id", "entailed"}` JSONL labels. Duplicate ids are
/// rejected with their line number.
pub fn load_entailed_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, bool>> {
    let display = path.as_ref().display().to_string();
    let file = File::open(path.as_ref())
        .map_err(|e| Error::InvalidInput(format!("cannot open {display}: {e}")))?;
    let mut labels = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawLabel = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, idx + 1, e.to_string()))?;
        if labels
            .insert(raw.instance_id.clone(), raw.entailed)
            .is_some()
        {
            return Err(Error::parse(
                &display,
                idx + 1,
                format!("duplicate label for instance {:?}", raw.instance_id),
            ));
        }
    }
    Ok(labels)
}
