//! Exhaustive enumeration of elementary routes, for cross-checking.

use super::{integer_demands, route_reduced_cost, DualVector, PricedRoute, PricingError};
use crate::instance::Instance;

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_N: usize = 10;

/// Cheapest capacity-feasible elementary route by enumeration. `None` when
/// no customer fits in a vehicle.
pub fn oracle_elementary(
    inst: &Instance,
    duals: &DualVector,
    max_n: usize,
) -> Result<Option<PricedRoute>, PricingError> {
    if max_n > ORACLE_MAX_N || inst.n() > max_n {
        return Err(PricingError::TooLarge { n: inst.n(), max_n: max_n.min(ORACLE_MAX_N) });
    }
    duals.validate(inst)?;
    let demand = integer_demands(inst)?;
    let cap = inst.capacity().floor() as u64;
    let mut best: Option<PricedRoute> = None;
    let mut path = Vec::with_capacity(inst.n());
    let mut used = vec![false; inst.n() + 1];
    extend(inst, duals, &demand, cap, 0, &mut path, &mut used, &mut best);
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    inst: &Instance,
    duals: &DualVector,
    demand: &[u64],
    cap: u64,
    load: u64,
    path: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut Option<PricedRoute>,
) {
    if !path.is_empty() {
        let rc = route_reduced_cost(inst, path, duals);
        if best.as_ref().is_none_or(|b| rc < b.reduced_cost) {
            *best = Some(PricedRoute { visits: path.clone(), reduced_cost: rc, load });
        }
    }
    for c in inst.customers() {
        if used[c] || load + demand[c] > cap {
            continue;
        }
        used[c] = true;
        path.push(c);
        extend(inst, duals, demand, cap, load + demand[c], path, used, best);
        path.pop();
        used[c] = false;
    }
}
