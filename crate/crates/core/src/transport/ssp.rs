//! Incremental successive-shortest-path solver.
//!
//! Waypoints are inserted one at a time. With the current partial plan
//! optimal, the residual graph has no negative cycle; the new waypoint is
//! routed along a shortest path `w -> d0 -> d1 -> ... -> t` where each hop
//! `a -> b` displaces the waypoint of `a` that is cheapest to move into `b`,
//! and `t` is a depot with spare capacity. The residual graph collapses to K
//! depot nodes, so each insertion costs a K-node Bellman-Ford plus heap
//! maintenance: O(N K^3 + N K^2 log N) overall.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

pub(crate) trait Cost: Copy + Add<Output = Self> + Sub<Output = Self> {
    /// `candidate` is a strict improvement over `incumbent`.
    fn improves(candidate: Self, incumbent: Self) -> bool;
    fn order(&self, other: &Self) -> Ordering;
}

impl Cost for f64 {
    #[inline]
    fn improves(candidate: f64, incumbent: f64) -> bool {
        candidate < incumbent - 1e-12 * (1.0 + incumbent.abs())
    }

    fn order(&self, other: &f64) -> Ordering {
        self.total_cmp(other)
    }
}

impl Cost for i64 {
    #[inline]
    fn improves(candidate: i64, incumbent: i64) -> bool {
        candidate < incumbent
    }

    fn order(&self, other: &i64) -> Ordering {
        self.cmp(other)
    }
}

/// Heap entry: cost of moving `waypoint` out of its depot into another.
#[derive(Clone, Copy)]
struct Move<C> {
    delta: C,
    waypoint: usize,
}

impl<C: Cost> PartialEq for Move<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<C: Cost> Eq for Move<C> {}

impl<C: Cost> PartialOrd for Move<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: Cost> Ord for Move<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta
            .order(&other.delta)
            .then(self.waypoint.cmp(&other.waypoint))
    }
}

const UNASSIGNED: usize = usize::MAX;

pub(crate) fn solve<C, F>(n: usize, k: usize, caps: &[usize], cost: F) -> Result<Vec<usize>>
where
    C: Cost,
    F: Fn(usize, usize) -> C,
{
    debug_assert_eq!(caps.len(), k);
    debug_assert_eq!(caps.iter().sum::<usize>(), n);
    if k == 1 {
        return Ok(vec![0; n]);
    }

    let mut assigned = vec![UNASSIGNED; n];
    let mut load = vec![0usize; k];
    // heaps[a * k + b] holds waypoints (possibly stale) of depot a keyed by
    // cost(u, b) - cost(u, a)
    let mut heaps: Vec<BinaryHeap<Reverse<Move<C>>>> =
        (0..k * k).map(|_| BinaryHeap::new()).collect();

    let place = |u: usize, j: usize, heaps: &mut Vec<BinaryHeap<Reverse<Move<C>>>>| {
        let here = cost(u, j);
        for b in (0..k).filter(|&b| b != j) {
            heaps[j * k + b].push(Reverse(Move {
                delta: cost(u, b) - here,
                waypoint: u,
            }));
        }
    };

    let mut edge: Vec<Option<Move<C>>> = vec![None; k * k];
    let mut dist: Vec<C> = Vec::with_capacity(k);
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; k];

    for w in 0..n {
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                let heap = &mut heaps[a * k + b];
                while let Some(Reverse(top)) = heap.peek() {
                    if assigned[top.waypoint] == a {
                        break;
                    }
                    heap.pop();
                }
                edge[a * k + b] = heap.peek().map(|r| r.0);
            }
        }

        dist.clear();
        dist.extend((0..k).map(|j| cost(w, j)));
        pred.iter_mut().for_each(|p| *p = None);

        for _ in 1..k {
            let mut changed = false;
            for a in 0..k {
                for b in 0..k {
                    let Some(mv) = edge[a * k + b] else { continue };
                    let cand = dist[a] + mv.delta;
                    if C::improves(cand, dist[b]) {
                        dist[b] = cand;
                        pred[b] = Some((a, mv.waypoint));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let mut target = None;
        for j in (0..k).filter(|&j| load[j] < caps[j]) {
            match target {
                None => target = Some(j),
                Some(t) if C::improves(dist[j], dist[t]) => target = Some(j),
                _ => {}
            }
        }
        let Some(target) = target else {
            return Err(Error::Contract(
                "depot capacity exhausted before all waypoints placed".into(),
            ));
        };

        load[target] += 1;
        let mut j = target;
        let mut hops = 0;
        while let Some((a, u)) = pred[j] {
            assigned[u] = j;
            place(u, j, &mut heaps);
            j = a;
            hops += 1;
            if hops >= k {
                return Err(Error::Numerical(
                    "shortest-path tree contains a cycle; costs too ill-conditioned".into(),
                ));
            }
        }
        assigned[w] = j;
        place(w, j, &mut heaps);
    }
    Ok(assigned)
}
