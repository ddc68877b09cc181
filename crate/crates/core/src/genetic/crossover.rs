//! Adapted order crossover on the two chromosomes.

use rand::prelude::*;

use crate::instance::Instance;
use crate::solution::delivered_weights;

/// Draws per-group target ratios uniformly between the parents' levels,
/// picks two cut points in `p1`, and delegates to [`aox_with`].
pub fn crossover_aox<R: Rng>(
    p1: &[usize],
    levels1: &[f64],
    p2: &[usize],
    levels2: &[f64],
    inst: &Instance,
    rng: &mut R,
) -> Vec<usize> {
    let targets: Vec<f64> = levels1
        .iter()
        .zip(levels2)
        .map(|(&a, &b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if hi > lo {
                rng.gen_range(lo..=hi)
            } else {
                lo
            }
        })
        .collect();
    let (start, end) = if p1.is_empty() {
        (0, 0)
    } else {
        (rng.gen_range(0..p1.len()), rng.gen_range(0..p1.len()))
    };
    aox_with(p1, p2, &targets, start, end, inst)
}

/// Deterministic core of the crossover.
///
/// The child starts with the circular fragment `p1[start..=end]` (wrapping
/// when `end < start`), then sweeps `p2` circularly from position `end + 1`,
/// taking a customer when it is not yet in the child and its group is still
/// below the target ratio. The child never grows beyond the longer parent.
pub fn aox_with(
    p1: &[usize],
    p2: &[usize],
    targets: &[f64],
    start: usize,
    end: usize,
    inst: &Instance,
) -> Vec<usize> {
    let cap = p1.len().max(p2.len());
    let mut child = Vec::with_capacity(cap);
    let mut inside = vec![false; inst.n() + 1];
    if !p1.is_empty() {
        let mut i = start;
        loop {
            child.push(p1[i]);
            inside[p1[i]] = true;
            if i == end {
                break;
            }
            i = (i + 1) % p1.len();
        }
    }
    let mut delivered = delivered_weights(&child, inst);
    let total = p2.len();
    for step in 0..total {
        if child.len() >= cap {
            break;
        }
        let c = p2[(end + 1 + step) % total];
        if inside[c] {
            continue;
        }
        let k = inst.group_of(c);
        if inst.level_ratio(k, delivered[k]) < targets[k] {
            child.push(c);
            inside[c] = true;
            delivered[k] += inst.weight(c);
        }
    }
    child
}
