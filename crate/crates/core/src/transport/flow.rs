//! Successive shortest paths for the transportation problem over rationals.

use super::TransportPlan;
use crate::rational::Q;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Node {
    Source(usize),
    Sink(usize),
}

/// Minimum-cost coupling of `supply` and `demand` (equal total mass).
///
/// Each round augments along a cheapest residual path found by Bellman–Ford;
/// starting from the empty flow there are no negative cycles, so the final
/// flow is optimal. Every augmentation exhausts a supply, a demand or a
/// residual arc, which bounds the number of rounds for rational data.
pub(super) fn min_cost_transport(
    supply: &BTreeMap<usize, Q>,
    demand: &BTreeMap<usize, Q>,
    cost: impl Fn(usize, usize) -> Q,
) -> TransportPlan {
    let src: Vec<usize> = supply.keys().copied().collect();
    let dst: Vec<usize> = demand.keys().copied().collect();
    let (ns, nt) = (src.len(), dst.len());
    let c: Vec<Vec<Q>> = src.iter().map(|&p| dst.iter().map(|&q| cost(p, q)).collect()).collect();
    let mut left: Vec<Q> = src.iter().map(|p| supply[p].clone()).collect();
    let mut need: Vec<Q> = dst.iter().map(|q| demand[q].clone()).collect();
    let mut flow = vec![vec![Q::zero(); nt]; ns];

    loop {
        if need.iter().all(|x| x.is_zero()) {
            break;
        }
        // Bellman–Ford over sources and sinks.
        let mut ds: Vec<Option<Q>> = left.iter().map(|l| (!l.is_zero()).then(Q::zero)).collect();
        let mut dt: Vec<Option<Q>> = vec![None; nt];
        let mut pred_t: Vec<usize> = vec![usize::MAX; nt];
        let mut pred_s: Vec<Option<usize>> = vec![None; ns];
        for _ in 0..(ns + nt) {
            let mut changed = false;
            for i in 0..ns {
                let Some(di) = ds[i].clone() else { continue };
                for j in 0..nt {
                    let cand = &di + &c[i][j];
                    if dt[j].as_ref().map_or(true, |d| cand < *d) {
                        dt[j] = Some(cand);
                        pred_t[j] = i;
                        changed = true;
                    }
                }
            }
            for j in 0..nt {
                let Some(dj) = dt[j].clone() else { continue };
                for i in 0..ns {
                    if flow[i][j].is_positive() {
                        let cand = &dj - &c[i][j];
                        if ds[i].as_ref().map_or(true, |d| cand < *d) {
                            ds[i] = Some(cand);
                            pred_s[i] = Some(j);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let target = (0..nt)
            .filter(|&j| need[j].is_positive() && dt[j].is_some())
            .min_by(|&a, &b| dt[a].cmp(&dt[b]).then(a.cmp(&b)))
            .expect("balanced transport always has an augmenting path");
        // Walk back to a source with remaining supply.
        let mut path = Vec::new();
        let mut j = target;
        let start = loop {
            let i = pred_t[j];
            path.push((Node::Source(i), Node::Sink(j)));
            match pred_s[i] {
                Some(jj) => {
                    path.push((Node::Sink(jj), Node::Source(i)));
                    j = jj;
                }
                None => break i,
            }
        };
        let mut amount = left[start].clone().min(need[target].clone());
        for step in &path {
            if let (Node::Sink(j), Node::Source(i)) = step {
                amount = amount.min(flow[*i][*j].clone());
            }
        }
        for step in &path {
            match *step {
                (Node::Source(i), Node::Sink(j)) => flow[i][j] += &amount,
                (Node::Sink(j), Node::Source(i)) => flow[i][j] -= &amount,
                _ => unreachable!(),
            }
        }
        left[start] -= &amount;
        need[target] -= &amount;
    }

    let mut plan = Vec::new();
    for i in 0..ns {
        for j in 0..nt {
            if !flow[i][j].is_zero() {
                plan.push((src[i], dst[j], flow[i][j].clone()));
            }
        }
    }
    plan
}
