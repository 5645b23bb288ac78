//! Thurstone Case V scaling of pairwise preference judgments.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::{JudgmentSet, Winner};
use crate::error::{Error, Result};
use crate::metaeval::SystemScores;

/// Scales pairwise judgments to one score per system.
///
/// For every compared pair the win proportion `p_ij` is clipped into
/// `[1/(2 m_ij), 1 - 1/(2 m_ij)]` (`m_ij` = number of comparisons
/// between i and j) so that unanimous preferences stay finite, then
/// mapped to a normal quantile `z_ij`. Scores are the least-squares
/// solution of `score_i - score_j = z_ij` over the comparison graph,
/// anchored to mean zero.
///
/// Errors with fewer than two systems, a system that was never
/// compared, or a disconnected comparison graph.
pub fn thurstone_scores(judgments: &JudgmentSet) -> Result<SystemScores> {
    let systems = judgments.systems();
    if systems.len() < 2 {
        return Err(Error::InvalidInput(
            "Thurstone scaling needs at least two systems".to_string(),
        ));
    }
    let index = |name: &str| {
        systems
            .iter()
            .position(|s| s == name)
            .expect("JudgmentSet guarantees membership")
    };
    let mut wins = vec![vec![0u64; systems.len()]; systems.len()];
    for c in judgments.comparisons() {
        let (winner, loser) = match c.winner {
            Winner::A => (&c.system_a, &c.system_b),
            Winner::B => (&c.system_b, &c.system_a),
        };
        wins[index(winner)][index(loser)] += 1;
    }
    let scores = solve_from_wins(&wins)?;
    Ok(SystemScores {
        systems: systems.to_vec(),
        scores,
    })
}

/// Case V solve on a win-count matrix; shared with the bootstrap, which
/// tallies resampled wins directly.
pub(crate) fn solve_from_wins(wins: &[Vec<u64>]) -> Result<Vec<f64>> {
    let l = wins.len();
    for (i, row) in wins.iter().enumerate() {
        let total: u64 = (0..l).map(|j| row[j] + wins[j][i]).sum();
        if total == 0 {
            return Err(Error::InvalidInput(format!(
                "system at index {i} appears in no comparison"
            )));
        }
    }
    if !connected(wins) {
        return Err(Error::InvalidInput(
            "comparison graph is disconnected".to_string(),
        ));
    }

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut lap = DMatrix::<f64>::zeros(l, l);
    let mut rhs = DVector::<f64>::zeros(l);
    for i in 0..l {
        for j in (i + 1)..l {
            let m = wins[i][j] + wins[j][i];
            if m == 0 {
                continue;
            }
            let bound = 1.0 / (2.0 * m as f64);
            let p = (wins[i][j] as f64 / m as f64).clamp(bound, 1.0 - bound);
            let z = normal.inverse_cdf(p);
            lap[(i, i)] += 1.0;
            lap[(j, j)] += 1.0;
            lap[(i, j)] -= 1.0;
            lap[(j, i)] -= 1.0;
            rhs[i] += z;
            rhs[j] -= z;
        }
    }
    // The Laplacian is singular (constant vectors are in its null
    // space); adding J/l pins the solution to mean zero.
    let shift = 1.0 / l as f64;
    for i in 0..l {
        for j in 0..l {
            lap[(i, j)] += shift;
        }
    }
    let solution = lap
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Undefined("Thurstone system is singular".to_string()))?;
    Ok(solution.iter().copied().collect())
}

fn connected(wins: &[Vec<u64>]) -> bool {
    let l = wins.len();
    let mut seen = vec![false; l];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..l {
            if !seen[j] && wins[i][j] + wins[j][i] > 0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
