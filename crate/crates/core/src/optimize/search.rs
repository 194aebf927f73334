use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SearchConfig;
use crate::bounds::RateValue;
use crate::error::{Error, Result};
use crate::probkit::dirichlet_row;

/// A distribution family parameterized by a list of probability-simplex rows.
pub trait Family: Sync {
    type Point: Clone + Send;

    /// Length of each simplex row.
    fn rows(&self) -> Vec<usize>;

    /// Turn row values into factor distributions.
    fn point(&self, rows: &[Vec<f64>]) -> Result<Self::Point>;

    /// Evaluate the objective at a point.
    fn value(&self, point: &Self::Point) -> Result<RateValue>;

    fn score(&self, rows: &[Vec<f64>]) -> Result<f64> {
        Ok(self.value(&self.point(rows)?)?.search_score())
    }
}

/// Result of one coordinate ascent run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ascent {
    pub rows: Vec<Vec<f64>>,
    pub score: f64,
    /// Score after each completed sweep, starting with the initial score.
    pub history: Vec<f64>,
    pub evaluations: u64,
}

const MIN_STEP: f64 = 1e-9;
const SETTLED_STEP: f64 = 1e-3;
/// Gains at or below this are rounding noise.
const GAIN_FLOOR: f64 = 1e-13;

/// Row-wise pattern search on the product of simplices.
///
/// Each row tries moving a fraction `s` of its mass toward every vertex and
/// jumping to every vertex; the best improvement above rounding noise is kept and `s`
/// doubles, otherwise `s` halves. A sweep visits every row once. The search
/// stops when a sweep improves by less than `improve_tol` after the steps have
/// settled, or after `max_sweeps` sweeps. Scores never decrease.
pub fn ascend<F: Family>(family: &F, start: Vec<Vec<f64>>, cfg: &SearchConfig) -> Result<Ascent> {
    let mut rows = start;
    let mut score = family.score(&rows)?;
    let mut evaluations = 1u64;
    let mut history = vec![score];
    let mut steps = vec![0.5f64; rows.len()];
    for _ in 0..cfg.max_sweeps {
        let before = score;
        for r in 0..rows.len() {
            let n = rows[r].len();
            if n < 2 {
                continue;
            }
            let current = rows[r].clone();
            let mut best: Option<(f64, Vec<f64>)> = None;
            let s = steps[r];
            for k in 0..n {
                for step in [s, 1.0] {
                    if step == 1.0 && current[k] == 1.0 {
                        continue;
                    }
                    let mut cand: Vec<f64> = current.iter().map(|p| p * (1.0 - step)).collect();
                    cand[k] += step;
                    rows[r] = cand;
                    let v = family.score(&rows)?;
                    evaluations += 1;
                    if v > score + GAIN_FLOOR && best.as_ref().is_none_or(|(b, _)| v > *b) {
                        best = Some((v, rows[r].clone()));
                    }
                    if s == 1.0 {
                        break;
                    }
                }
            }
            match best {
                Some((v, cand)) => {
                    rows[r] = cand;
                    score = v;
                    steps[r] = (s * 2.0).min(1.0);
                }
                None => {
                    rows[r] = current;
                    steps[r] = (s * 0.5).max(MIN_STEP);
                }
            }
        }
        history.push(score);
        let settled = steps.iter().all(|&s| s <= SETTLED_STEP);
        if score - before < cfg.improve_tol && settled {
            break;
        }
    }
    Ok(Ascent {
        rows,
        score,
        history,
        evaluations,
    })
}

/// Flat Dirichlet start for restart `index`, drawn from its own stream.
pub fn random_start(rows: &[usize], seed: u64, index: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rows.iter().map(|&n| dirichlet_row(&mut rng, n)).collect()
}

/// Best point of a search.
#[derive(Debug, Clone)]
pub struct SearchOutcome<P> {
    pub point: P,
    pub rows: Vec<Vec<f64>>,
    pub value: RateValue,
    pub evaluations: u64,
    pub per_restart_bests: Vec<f64>,
    pub grid_complete: bool,
}

/// Independent ascents from seeded random starts; the best score wins and
/// ties go to the lowest restart index.
pub fn multi_start<F: Family>(family: &F, cfg: &SearchConfig, extra_start: Option<Vec<Vec<f64>>>) -> Result<SearchOutcome<F::Point>> {
    let dims = family.rows();
    let mut starts: Vec<Vec<Vec<f64>>> = (0..cfg.restarts.max(1) as u64)
        .map(|i| random_start(&dims, cfg.seed, i))
        .collect();
    if let Some(s) = extra_start {
        starts.push(s);
    }
    let runs: Vec<Result<Ascent>> = starts.into_par_iter().map(|s| ascend(family, s, cfg)).collect();
    let mut best: Option<Ascent> = None;
    let mut evaluations = 0;
    let mut per_restart_bests = Vec::with_capacity(runs.len());
    for run in runs {
        let run = run?;
        evaluations += run.evaluations;
        per_restart_bests.push(run.score);
        if best.as_ref().is_none_or(|b| run.score > b.score) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let point = family.point(&best.rows)?;
    let value = family.value(&point)?;
    Ok(SearchOutcome {
        point,
        rows: best.rows,
        value,
        evaluations,
        per_restart_bests,
        grid_complete: false,
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of grid points with resolution `1/den` over the given rows.
pub fn grid_size(rows: &[usize], den: u32) -> u128 {
    rows.iter()
        .map(|&n| binomial(den as u128 + n as u128 - 1, n as u128 - 1))
        .fold(1u128, |a, b| a.saturating_mul(b))
}

/// All compositions of `den` into `n` nonnegative parts, as probability rows.
fn compositions(n: usize, den: u32) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first);
            rec(n - 1, left - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, den, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / den as f64).collect())
        .collect()
}

/// Exhaustive maximum over the rational grid of step `1/den` on every row.
/// Refuses when the grid exceeds `budget` points.
pub fn grid_enumerate<F: Family>(family: &F, den: u32, budget: u128) -> Result<SearchOutcome<F::Point>> {
    if den == 0 {
        return Err(Error::Argument("grid step denominator must be positive".into()));
    }
    let dims = family.rows();
    let total = grid_size(&dims, den);
    if total > budget {
        return Err(Error::BudgetExceeded { required: total, budget });
    }
    let choices: Vec<Vec<Vec<f64>>> = dims.iter().map(|&n| compositions(n, den)).collect();
    let first = choices.first().map_or(1, Vec::len);
    // split on the first row; chunk results merge in index order
    let chunks: Vec<Result<(f64, Vec<usize>, u64)>> = (0..first)
        .into_par_iter()
        .map(|i0| {
            let mut idx = vec![0usize; dims.len()];
            if !idx.is_empty() {
                idx[0] = i0;
            }
            let mut best = (f64::NEG_INFINITY, idx.clone());
            let mut count = 0u64;
            loop {
                let rows: Vec<Vec<f64>> = idx.iter().enumerate().map(|(r, &i)| choices[r][i].clone()).collect();
                let v = family.score(&rows)?;
                count += 1;
                if v > best.0 {
                    best = (v, idx.clone());
                }
                let mut pos = dims.len();
                loop {
                    if pos <= 1 {
                        return Ok((best.0, best.1, count));
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < choices[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluations = 0;
    let mut per_chunk = Vec::with_capacity(chunks.len());
    for c in chunks {
        let (v, idx, count) = c?;
        evaluations += count;
        per_chunk.push(v);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, idx));
        }
    }
    let (_, idx) = best.expect("nonempty grid");
    let rows: Vec<Vec<f64>> = idx.iter().enumerate().map(|(r, &i)| choices[r][i].clone()).collect();
    let point = family.point(&rows)?;
    let value = family.value(&point)?;
    Ok(SearchOutcome {
        point,
        rows,
        value,
        evaluations,
        per_restart_bests: per_chunk,
        grid_complete: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_match_compositions() {
        assert_eq!(compositions(3, 4).len(), 15);
        assert_eq!(grid_size(&[3, 2, 1], 4), 15 * 5);
        assert_eq!(compositions(1, 8), vec![vec![1.0]]);
    }
}
