//! Deterministic synthetic workloads for the criterion benches.

use parent_core::corpus::{tokenize, EvalInstance, Judgment, JudgmentSet, Record, Table, Winner};
use parent_core::metaeval::MetricScores;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn token(rng: &mut ChaCha8Rng) -> String {
    format!("w{:02}", rng.random_range(0..50))
}

fn text(rng: &mut ChaCha8Rng, min: usize, max: usize) -> Vec<String> {
    let len = rng.random_range(min..=max);
    (0..len).map(|_| token(rng)).collect()
}

/// WikiBio-shaped instances: ten records with short values, one
/// reference that mentions a table value, and a generation that copies
/// a couple of values before trailing off into unsupported text.
pub fn instances(n: usize, seed: u64) -> Vec<EvalInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let records: Vec<Record> = (0..10)
                .map(|k| {
                    let value = text(&mut rng, 1, 4).join(" ");
                    Record::new(&format!("attr_{k}"), &value).unwrap()
                })
                .collect();

            let mut reference = records[2].value().to_vec();
            reference.extend(text(&mut rng, 16, 21));
            let mut generation = records[0].value().to_vec();
            generation.extend(records[1].value().iter().cloned());
            generation.extend(text(&mut rng, 15, 19));

            EvalInstance::new(
                Table::new(records).unwrap(),
                vec![tokenize(&reference.join(" "))],
                tokenize(&generation.join(" ")),
            )
            .unwrap()
        })
        .collect()
}

/// Pairwise judgments over `n_systems` of descending quality, with one
/// comparison per system pair per instance, plus a metric whose scores
/// track quality with per-instance noise.
pub fn judged_metric(
    n_instances: usize,
    n_systems: usize,
    seed: u64,
) -> (JudgmentSet, MetricScores) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let systems: Vec<String> = (0..n_systems).map(|k| format!("sys{k}")).collect();
    let quality = |k: usize| 1.0 - 0.5 * k as f64;

    let mut comparisons = Vec::new();
    let mut metric = MetricScores::new();
    for j in 0..n_instances {
        let id = format!("i{j}");
        for a in 0..n_systems {
            for b in a + 1..n_systems {
                let upset = rng.random::<f64>() < 0.25;
                let winner = if (quality(a) > quality(b)) != upset {
                    Winner::A
                } else {
                    Winner::B
                };
                comparisons.push(Judgment {
                    instance_id: id.clone(),
                    system_a: systems[a].clone(),
                    system_b: systems[b].clone(),
                    winner,
                });
            }
        }
        for (k, system) in systems.iter().enumerate() {
            let noise = 0.4 * rng.random::<f64>() - 0.2;
            metric.insert(system, &id, quality(k) + noise).unwrap();
        }
    }
    (JudgmentSet::from_comparisons(comparisons).unwrap(), metric)
}
