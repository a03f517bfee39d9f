// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact p-variation of finite paths.
//!
//! For a path `y_0..y_n` and `p >= 1`,
//!
//! ```text
//! v_p(y) = max { sum_j |y_{k_j} - y_{k_{j-1}}|^p : 0 = k_0 < ... < k_m = n }.
//! ```
//!
//! A piecewise-constant path (such as a partial-sum process) attains the
//! supremum over continuum partitions at its jump points, so this discrete
//! maximum is the p-variation of the step function itself.
//!
//! Three algorithms share one contract, including the choice of witness
//! partition:
//!
//! * [`pvar_bruteforce`] enumerates all `2^(n-1)` partitions (test oracle).
//! * [`pvar_dp`] is the `O(n^2)` dynamic program
//!   `V[j] = max_{i<j} V[i] + |y_j - y_i|^p`.
//! * [`pvar`] first applies [`reduce_to_extrema`], then runs the dynamic
//!   program over candidates `i` for which `y_i` and `y_j` are the minimum and
//!   maximum of `y[i..=j]`. Consecutive points of an optimal partition always
//!   have this property (otherwise inserting the offending point increases
//!   the sum), which cuts the work to roughly `O(n^1.5)` on random walks.
//!
//! Ties are resolved deterministically: among partitions whose value is
//! within [`TIE_RTOL`] (relative) of the maximum, the one with the fewest
//! points wins, then the lexicographically smallest index sequence.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::cumulative_path;

/// Relative tolerance under which two partition values count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Largest number of interior points [`pvar_bruteforce`] accepts.
pub const BRUTEFORCE_MAX_INTERIOR: usize = 22;

/// The p-variation of a path together with a partition attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvarResult {
    pub value: f64,
    /// Increasing indices `0 = k_0 < ... < k_m = n`.
    pub partition: Vec<usize>,
    pub p: f64,
}

impl PvarResult {
    /// `v_p^(1/p)`, the p-variation seminorm.
    pub fn norm(&self) -> f64 {
        self.value.powf(1.0 / self.p)
    }

    /// Recomputes the value from the stored partition.
    pub fn recompute(&self, path: &[f64]) -> f64 {
        partition_value(path, &self.partition, self.p)
    }
}

/// `|b - a|^p`, shared by every algorithm so that equal partitions produce
/// bit-identical values.
#[inline]
fn increment(a: f64, b: f64, p: f64) -> f64 {
    let d = (b - a).abs();
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

#[inline]
fn tie_floor(best: f64) -> f64 {
    best - TIE_RTOL * best.abs()
}

/// `sum_j |y_{k_j} - y_{k_{j-1}}|^p`, accumulated left to right.
pub fn partition_value(path: &[f64], partition: &[usize], p: f64) -> f64 {
    partition
        .windows(2)
        .map(|w| increment(path[w[0]], path[w[1]], p))
        .sum::<f64>()
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent {
            p,
            requirement: "p-variation as a maximum over partitions requires p >= 1",
        })
    }
}

fn check_path(path: &[f64]) -> Result<()> {
    if path.is_empty() {
        Err(Error::EmptySeries)
    } else {
        Ok(())
    }
}

fn trivial(p: f64) -> PvarResult {
    PvarResult {
        value: 0.0,
        partition: vec![0],
        p,
    }
}

/// Exhaustive search over every partition. Limited to
/// [`BRUTEFORCE_MAX_INTERIOR`] interior points.
pub fn pvar_bruteforce(path: &[f64], p: f64) -> Result<PvarResult> {
    check_exponent(p)?;
    check_path(path)?;
    let n = path.len() - 1;
    if n == 0 {
        return Ok(trivial(p));
    }
    let interior = n - 1;
    if interior > BRUTEFORCE_MAX_INTERIOR {
        return Err(Error::OracleSize {
            interior,
            max: BRUTEFORCE_MAX_INTERIOR,
        });
    }
    // Bit k of the mask selects interior index k + 1.
    let value_of = |mask: u32| {
        let mut last = 0;
        let mut sum = 0.0;
        for k in 0..interior {
            if mask >> k & 1 == 1 {
                sum += increment(path[last], path[k + 1], p);
                last = k + 1;
            }
        }
        sum + increment(path[last], path[n], p)
    };
    let masks = 0..(1u32 << interior);
    let best = masks
        .clone()
        .map(value_of)
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = tie_floor(best);

    let mut chosen: Option<(u32, f64, Vec<usize>)> = None;
    for mask in masks {
        let v = value_of(mask);
        if v < floor {
            continue;
        }
        let better = match &chosen {
            None => true,
            Some((cm, _, cp)) => match mask.count_ones().cmp(&cm.count_ones()) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => mask_partition(mask, n) < *cp,
            },
        };
        if better {
            chosen = Some((mask, v, mask_partition(mask, n)));
        }
    }
    let (_, value, partition) = chosen.expect("at least one partition");
    Ok(PvarResult {
        value,
        partition,
        p,
    })
}

fn mask_partition(mask: u32, n: usize) -> Vec<usize> {
    let mut part = vec![0];
    part.extend((0..n - 1).filter(|k| mask >> k & 1 == 1).map(|k| k + 1));
    part.push(n);
    part
}

/// Dynamic-program state: best value, point count and predecessor per prefix.
struct Table {
    value: Vec<f64>,
    count: Vec<usize>,
    parent: Vec<usize>,
    /// Scratch buffer of `(candidate, value)` pairs for the current step.
    cands: Vec<(usize, f64)>,
}

impl Table {
    fn new(len: usize) -> Self {
        let mut t = Self {
            value: vec![0.0; len],
            count: vec![0; len],
            parent: vec![0; len],
            cands: Vec::new(),
        };
        t.count[0] = 1;
        t
    }

    /// Prefix partition ending at `i`, in increasing order.
    fn chain(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while i != 0 {
            i = self.parent[i];
            out.push(i);
        }
        out.reverse();
        out
    }

    /// Lexicographic order of the prefix partitions ending at `a` and `b`,
    /// where indices are compared through `key`.
    fn lex_cmp(&self, a: usize, b: usize, key: &[usize]) -> Ordering {
        let ca = self.chain(a).into_iter().map(|i| key[i]);
        let cb = self.chain(b).into_iter().map(|i| key[i]);
        ca.cmp(cb)
    }

    /// Settles `V[j]` from the candidates collected in `self.cands`.
    fn settle(&mut self, j: usize, key: &[usize]) {
        let best = self
            .cands
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let floor = tie_floor(best);
        let mut chosen: Option<(usize, f64)> = None;
        for &(i, v) in &self.cands {
            if v < floor {
                continue;
            }
            chosen = match chosen {
                None => Some((i, v)),
                Some((c, cv)) => {
                    let take = match self.count[i].cmp(&self.count[c]) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => self.lex_cmp(i, c, key) == Ordering::Less,
                    };
                    if take {
                        Some((i, v))
                    } else {
                        Some((c, cv))
                    }
                }
            };
        }
        let (i, v) = chosen.expect("every prefix has a predecessor candidate");
        self.value[j] = v;
        self.count[j] = self.count[i] + 1;
        self.parent[j] = i;
        self.cands.clear();
    }

    fn finish(&self, p: f64, key: &[usize]) -> PvarResult {
        let last = self.value.len() - 1;
        PvarResult {
            value: self.value[last],
            partition: self.chain(last).into_iter().map(|i| key[i]).collect(),
            p,
        }
    }
}

/// The `O(n^2)` dynamic program over all predecessors.
pub fn pvar_dp(path: &[f64], p: f64) -> Result<PvarResult> {
    check_exponent(p)?;
    check_path(path)?;
    if path.len() == 1 {
        return Ok(trivial(p));
    }
    let key: Vec<usize> = (0..path.len()).collect();
    let mut table = Table::new(path.len());
    for j in 1..path.len() {
        for i in 0..j {
            let v = table.value[i] + increment(path[i], path[j], p);
            table.cands.push((i, v));
        }
        table.settle(j, &key);
    }
    Ok(table.finish(p, &key))
}

/// A path restricted to its turning points.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduced {
    pub values: Vec<f64>,
    /// Position of each retained value in the original path.
    pub indices: Vec<usize>,
}

impl Reduced {
    /// Translates a partition of the reduced path back to original indices.
    pub fn map_partition(&self, partition: &[usize]) -> Vec<usize> {
        partition.iter().map(|&k| self.indices[k]).collect()
    }
}

/// Keeps both endpoints and every strict local extremum.
///
/// Runs of equal values are collapsed onto their first index, except a run
/// that reaches the end of the path, which is represented by the last index.
/// For `p >= 1` this never changes the p-variation, and it keeps the
/// witness partition chosen by the tie-breaking rule.
pub fn reduce_to_extrema(path: &[f64]) -> Reduced {
    let n = match path.len() {
        0 => {
            return Reduced {
                values: vec![],
                indices: vec![],
            }
        }
        len => len - 1,
    };
    // First index of every maximal run of equal values.
    let mut runs = vec![0];
    for k in 1..=n {
        if path[k] != path[*runs.last().unwrap()] {
            runs.push(k);
        }
    }
    if runs.len() == 1 {
        let indices = if n == 0 { vec![0] } else { vec![0, n] };
        return Reduced {
            values: indices.iter().map(|&i| path[i]).collect(),
            indices,
        };
    }
    *runs.last_mut().unwrap() = n;

    let mut indices = vec![0];
    for w in runs.windows(3) {
        let (a, b, c) = (path[w[0]], path[w[1]], path[w[2]]);
        if (b > a) != (c > b) {
            indices.push(w[1]);
        }
    }
    indices.push(n);
    Reduced {
        values: indices.iter().map(|&i| path[i]).collect(),
        indices,
    }
}

/// Exact p-variation with witness partition; the fast path used by the
/// statistics. Agrees with [`pvar_dp`] in value and partition.
pub fn pvar(path: &[f64], p: f64) -> Result<PvarResult> {
    check_exponent(p)?;
    check_path(path)?;
    if path.len() == 1 {
        return Ok(trivial(p));
    }
    let reduced = reduce_to_extrema(path);
    let z = &reduced.values;
    let mut table = Table::new(z.len());
    for j in 1..z.len() {
        let zj = z[j];
        let prev = z[j - 1];
        let mut i = j;
        if zj > prev {
            // y_j must be the window maximum and y_i its minimum.
            let mut run_min = f64::INFINITY;
            while i > 0 {
                i -= 1;
                let zi = z[i];
                if zi > zj {
                    break;
                }
                if zi <= run_min {
                    run_min = zi;
                    table.cands.push((i, table.value[i] + increment(zi, zj, p)));
                }
            }
        } else if zj < prev {
            let mut run_max = f64::NEG_INFINITY;
            while i > 0 {
                i -= 1;
                let zi = z[i];
                if zi < zj {
                    break;
                }
                if zi >= run_max {
                    run_max = zi;
                    table.cands.push((i, table.value[i] + increment(zi, zj, p)));
                }
            }
        } else {
            table.cands.push((j - 1, table.value[j - 1]));
        }
        table.settle(j, &reduced.indices);
    }
    Ok(table.finish(p, &reduced.indices))
}

/// `v_p` of the partial-sum path `(0, S_1, ..., S_n)` of `x`, i.e. the maximum
/// over block partitions of `sum |block sum|^p`.
pub fn pvar_partial_sum(x: &[f64], p: f64) -> Result<PvarResult> {
    check_path(x)?;
    pvar(&cumulative_path(x), p)
}

/// `||y||_(p) = v_p(y)^(1/p)`.
pub fn pvar_norm(path: &[f64], p: f64) -> Result<f64> {
    Ok(pvar(path, p)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_three(path: &[f64], p: f64) -> PvarResult {
        let a = pvar_bruteforce(path, p).unwrap();
        let b = pvar_dp(path, p).unwrap();
        let c = pvar(path, p).unwrap();
        assert_eq!(a, b, "dp vs brute force on {path:?}");
        assert_eq!(a, c, "fast vs brute force on {path:?}");
        a
    }

    #[test]
    fn constant_path() {
        for p in [1.0, 2.0, 3.5] {
            let r = all_three(&[0.0, 0.0, 0.0], p);
            assert_eq!(r.value, 0.0);
            assert_eq!(r.partition, vec![0, 2]);
        }
    }

    #[test]
    fn tent() {
        for p in [1.0, 1.5, 2.0] {
            let r = all_three(&[0.0, 1.0, 0.0], p);
            assert_eq!(r.value, 2.0);
            assert_eq!(r.partition, vec![0, 1, 2]);
        }
    }

    #[test]
    fn monotone_single_block() {
        let r = all_three(&[0.0, 1.0, 3.0, 6.0], 2.0);
        assert_eq!(r.value, 36.0);
        assert_eq!(r.partition, vec![0, 3]);
        // p = 1: every refinement ties, the fewest points win
        let r = all_three(&[0.0, 1.0, 3.0, 6.0], 1.0);
        assert_eq!(r.partition, vec![0, 3]);
    }

    #[test]
    fn plateau_tie_goes_to_first_index() {
        let r = all_three(&[0.0, 1.0, 1.0, 0.0], 1.0);
        assert_eq!(r.value, 2.0);
        assert_eq!(r.partition, vec![0, 1, 3]);
        let r = all_three(&[0.0, 1.0, 1.0], 2.0);
        assert_eq!(r.partition, vec![0, 2]);
    }

    #[test]
    fn partial_sums() {
        assert_eq!(pvar_partial_sum(&[1.0, 1.0, 1.0], 2.0).unwrap().value, 9.0);
        assert_eq!(
            pvar_partial_sum(&[1.0, -1.0, 1.0, -1.0], 1.0)
                .unwrap()
                .value,
            4.0
        );
    }

    #[test]
    fn norms() {
        assert_eq!(pvar_norm(&[0.0, 1.0, 0.0], 2.0).unwrap(), 2f64.sqrt());
        let c: f64 = -1.7;
        approx::assert_relative_eq!(
            pvar_norm(&[0.0, c], 3.0).unwrap(),
            c.abs(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn single_point_path() {
        let r = pvar(&[4.0], 2.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.partition, vec![0]);
    }

    #[test]
    fn rejects_small_exponent_and_empty_input() {
        assert!(matches!(
            pvar_dp(&[0.0, 1.0], 0.5),
            Err(Error::UnsupportedExponent { .. })
        ));
        assert!(matches!(
            pvar(&[0.0, 1.0], f64::NAN),
            Err(Error::UnsupportedExponent { .. })
        ));
        assert!(matches!(pvar(&[], 2.0), Err(Error::EmptySeries)));
        assert!(matches!(
            pvar_partial_sum(&[], 2.0),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn oracle_size_cap() {
        let path = vec![0.0; BRUTEFORCE_MAX_INTERIOR + 3];
        assert!(matches!(
            pvar_bruteforce(&path, 2.0),
            Err(Error::OracleSize { .. })
        ));
        let path = vec![0.0; BRUTEFORCE_MAX_INTERIOR + 2];
        assert!(pvar_bruteforce(&path, 2.0).is_ok());
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_to_extrema(&[0.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(r.values, vec![0.0, 2.0, 0.0]);
        assert_eq!(r.indices, vec![0, 2, 4]);
        let r = reduce_to_extrema(&[3.0; 5]);
        assert_eq!(r.indices, vec![0, 4]);
        let r = reduce_to_extrema(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(r.indices, vec![0, 2, 5]);
        assert_eq!(r.map_partition(&[0, 2]), vec![0, 5]);
    }

    #[test]
    fn recompute_matches_value() {
        let path = [0.0, 0.3, -1.2, 0.8, 0.1, 2.0];
        for p in [1.0, 2.0, 3.0] {
            let r = pvar(&path, p).unwrap();
            assert_eq!(r.recompute(&path), r.value);
            assert!(r.value >= increment(path[0], path[5], p));
        }
    }
}
