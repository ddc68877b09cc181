//! Move definitions, incremental evaluation and application.

use crate::instance::Instance;
use crate::solution::{PenaltyState, Solution};

const NONE: usize = usize::MAX;

/// Insertion point of a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    /// Right after the given customer.
    After(usize),
    /// At the start of the given route slot (possibly an empty route).
    RouteStart(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    TwoOpt,
    TwoOptStar,
    Swap11,
    Swap21,
    Swap22,
    Relocate1,
    Relocate2,
    Remove,
    Add,
    Replace,
}

/// A neighborhood move. `u` is always a visited customer except in `Add`,
/// where the unvisited customer is `v`. Moves that name the successor of a
/// customer (`Relocate2`, `Swap21`, `Swap22`) take the pair starting there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Same route: reverse the path from the successor of `u` to `v`.
    TwoOpt { u: usize, v: usize },
    /// Different routes: exchange the tails after `u` and after `v`.
    TwoOptStar { u: usize, v: usize },
    Swap11 { u: usize, v: usize },
    /// Exchange the pair `(u, succ u)` with `v`.
    Swap21 { u: usize, v: usize },
    /// Exchange the pairs `(u, succ u)` and `(v, succ v)`.
    Swap22 { u: usize, v: usize },
    Relocate1 { u: usize, to: Anchor },
    /// Move the pair `(u, succ u)`.
    Relocate2 { u: usize, to: Anchor },
    Remove { u: usize },
    Add { v: usize, to: Anchor },
    /// Visited `u` leaves, unvisited `v` takes its place.
    Replace { u: usize, v: usize },
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::TwoOpt { .. } => MoveKind::TwoOpt,
            Move::TwoOptStar { .. } => MoveKind::TwoOptStar,
            Move::Swap11 { .. } => MoveKind::Swap11,
            Move::Swap21 { .. } => MoveKind::Swap21,
            Move::Swap22 { .. } => MoveKind::Swap22,
            Move::Relocate1 { .. } => MoveKind::Relocate1,
            Move::Relocate2 { .. } => MoveKind::Relocate2,
            Move::Remove { .. } => MoveKind::Remove,
            Move::Add { .. } => MoveKind::Add,
            Move::Replace { .. } => MoveKind::Replace,
        }
    }
}

/// Mutable search state with per-route prefix data.
#[derive(Debug, Clone)]
pub(crate) struct State<'a> {
    pub inst: &'a Instance,
    pub pen: PenaltyState,
    pub routes: Vec<Vec<usize>>,
    pub route_of: Vec<usize>,
    pub pos_of: Vec<usize>,
    /// Prefix sums per route: load, distance from the depot, profit.
    pre_load: Vec<Vec<f64>>,
    pre_dist: Vec<Vec<f64>>,
    pre_profit: Vec<Vec<f64>>,
    pub dist: Vec<f64>,
    pub load: Vec<f64>,
    pub profit: Vec<f64>,
    pub delivered: Vec<f64>,
}

impl<'a> State<'a> {
    /// One slot per route of `sol`, plus empty slots up to the fleet size.
    pub fn new(sol: &Solution, inst: &'a Instance, pen: &PenaltyState) -> Self {
        let mut routes: Vec<Vec<usize>> = sol
            .routes
            .iter()
            .filter(|r| !r.visits.is_empty())
            .map(|r| r.visits.clone())
            .collect();
        while routes.len() < inst.fleet_size() {
            routes.push(Vec::new());
        }
        let slots = routes.len();
        let mut st = State {
            inst,
            pen: pen.clone(),
            routes,
            route_of: vec![NONE; inst.n() + 1],
            pos_of: vec![NONE; inst.n() + 1],
            pre_load: vec![Vec::new(); slots],
            pre_dist: vec![Vec::new(); slots],
            pre_profit: vec![Vec::new(); slots],
            dist: vec![0.0; slots],
            load: vec![0.0; slots],
            profit: vec![0.0; slots],
            delivered: vec![0.0; inst.group_count()],
        };
        for r in 0..slots {
            st.refresh(r);
            for &c in &st.routes[r] {
                st.delivered[inst.group_of(c)] += inst.weight(c);
            }
        }
        st
    }

    pub fn visited(&self, c: usize) -> bool {
        self.route_of[c] != NONE
    }

    pub fn empty_slot(&self) -> Option<usize> {
        self.routes.iter().position(|r| r.is_empty())
    }

    fn refresh(&mut self, r: usize) {
        let inst = self.inst;
        let seq = &self.routes[r];
        let (pl, pd, pp) = (&mut self.pre_load[r], &mut self.pre_dist[r], &mut self.pre_profit[r]);
        pl.clear();
        pd.clear();
        pp.clear();
        let (mut l, mut d, mut p, mut prev) = (0.0, 0.0, 0.0, 0);
        for (i, &c) in seq.iter().enumerate() {
            l += inst.demand(c);
            d += inst.d(prev, c);
            p += inst.profit(c);
            pl.push(l);
            pd.push(d);
            pp.push(p);
            self.route_of[c] = r;
            self.pos_of[c] = i;
            prev = c;
        }
        self.dist[r] = if seq.is_empty() { 0.0 } else { d + inst.d(prev, 0) };
        self.load[r] = l;
        self.profit[r] = p;
    }

    #[inline]
    fn pred(&self, c: usize) -> usize {
        let p = self.pos_of[c];
        if p == 0 {
            0
        } else {
            self.routes[self.route_of[c]][p - 1]
        }
    }

    #[inline]
    fn succ(&self, c: usize) -> usize {
        let r = &self.routes[self.route_of[c]];
        let p = self.pos_of[c] + 1;
        if p == r.len() {
            0
        } else {
            r[p]
        }
    }

    #[inline]
    fn term(&self, dist: f64, load: f64, profit: f64) -> f64 {
        dist - profit + self.pen.w_q * (load - self.inst.capacity()).max(0.0)
    }

    #[inline]
    fn route_term(&self, r: usize) -> f64 {
        self.term(self.dist[r], self.load[r], self.profit[r])
    }

    /// Change of route `r`'s term when its distance, load and profit move by
    /// the given amounts.
    #[inline]
    fn route_change(&self, r: usize, dd: f64, dl: f64, dp: f64) -> f64 {
        self.term(self.dist[r] + dd, self.load[r] + dl, self.profit[r] + dp) - self.route_term(r)
    }

    fn service_change(&self, changes: &[(usize, f64)]) -> f64 {
        let mut delta = 0.0;
        match changes {
            [(k, w)] => {
                let k = *k;
                delta += self.pen.w_s[k]
                    * (self.inst.shortfall(k, self.delivered[k] + w)
                        - self.inst.shortfall(k, self.delivered[k]));
            }
            [(k1, w1), (k2, w2)] if k1 == k2 => {
                let k = *k1;
                delta += self.pen.w_s[k]
                    * (self.inst.shortfall(k, self.delivered[k] + w1 + w2)
                        - self.inst.shortfall(k, self.delivered[k]));
            }
            _ => {
                for &(k, w) in changes {
                    delta += self.pen.w_s[k]
                        * (self.inst.shortfall(k, self.delivered[k] + w)
                            - self.inst.shortfall(k, self.delivered[k]));
                }
            }
        }
        delta
    }

    /// `(route, node before, node after)` of an insertion point.
    fn anchor(&self, a: Anchor) -> Option<(usize, usize, usize)> {
        match a {
            Anchor::After(x) => {
                if x == 0 || x >= self.route_of.len() || !self.visited(x) {
                    return None;
                }
                Some((self.route_of[x], x, self.succ(x)))
            }
            Anchor::RouteStart(r) => {
                let seq = self.routes.get(r)?;
                Some((r, 0, seq.first().copied().unwrap_or(0)))
            }
        }
    }

    fn customer(&self, c: usize) -> bool {
        c >= 1 && c < self.route_of.len()
    }

    /// Cost change of `mv`, or `None` when the move does not apply.
    pub fn delta(&self, mv: &Move) -> Option<f64> {
        let inst = self.inst;
        let d = |a: usize, b: usize| inst.d(a, b);
        match *mv {
            Move::Relocate1 { u, to } => {
                if !self.customer(u) || !self.visited(u) {
                    return None;
                }
                let (rv, a, b) = self.anchor(to)?;
                if a == u {
                    return None;
                }
                if b == u {
                    return Some(0.0);
                }
                let ru = self.route_of[u];
                let (p, s) = (self.pred(u), self.succ(u));
                let rem = d(p, s) - d(p, u) - d(u, s);
                let ins = d(a, u) + d(u, b) - d(a, b);
                if ru == rv {
                    return Some(rem + ins);
                }
                let (q, pr) = (inst.demand(u), inst.profit(u));
                Some(self.route_change(ru, rem, -q, -pr) + self.route_change(rv, ins, q, pr))
            }
            Move::Relocate2 { u, to } => {
                if !self.customer(u) || !self.visited(u) {
                    return None;
                }
                let x = self.succ(u);
                if x == 0 {
                    return None;
                }
                let (rv, a, b) = self.anchor(to)?;
                if a == u || a == x {
                    return None;
                }
                if b == u {
                    return Some(0.0);
                }
                let ru = self.route_of[u];
                let (p, s) = (self.pred(u), self.succ(x));
                let rem = d(p, s) - d(p, u) - d(x, s);
                let ins = d(a, u) + d(x, b) - d(a, b);
                if ru == rv {
                    return Some(rem + ins);
                }
                let q = inst.demand(u) + inst.demand(x);
                let pr = inst.profit(u) + inst.profit(x);
                Some(self.route_change(ru, rem, -q, -pr) + self.route_change(rv, ins, q, pr))
            }
            Move::Swap11 { u, v } | Move::Swap21 { u, v } | Move::Swap22 { u, v } => {
                if !self.customer(u) || !self.customer(v) || !self.visited(u) || !self.visited(v) {
                    return None;
                }
                let la = match mv.kind() {
                    MoveKind::Swap11 => 1,
                    _ => 2,
                };
                let lb = if mv.kind() == MoveKind::Swap22 { 2 } else { 1 };
                let x = if la == 2 { self.succ(u) } else { u };
                let y = if lb == 2 { self.succ(v) } else { v };
                if x == 0 || y == 0 {
                    return None;
                }
                if u == v || u == y || x == v || x == y {
                    return None;
                }
                let (ru, rv) = (self.route_of[u], self.route_of[v]);
                if ru == rv {
                    // orient so that segment (a..b) precedes (c..e); both keep
                    // their direction, only the four boundary edges change
                    let ((a, b), (c, e)) = if self.pos_of[u] < self.pos_of[v] { ((u, x), (v, y)) } else { ((v, y), (u, x)) };
                    let (pa, se) = (self.pred(a), self.succ(e));
                    let sb = self.succ(b);
                    return Some(if sb == c {
                        d(pa, c) + d(e, a) + d(b, se) - d(pa, a) - d(b, c) - d(e, se)
                    } else {
                        let pc = self.pred(c);
                        d(pa, c) + d(e, sb) + d(pc, a) + d(b, se) - d(pa, a) - d(b, sb) - d(pc, c) - d(e, se)
                    });
                }
                let (pu, sx) = (self.pred(u), self.succ(x));
                let (pv, sy) = (self.pred(v), self.succ(y));
                let inner_a = if la == 2 { d(u, x) } else { 0.0 };
                let inner_b = if lb == 2 { d(v, y) } else { 0.0 };
                let du = d(pu, v) + inner_b + d(y, sx) - d(pu, u) - inner_a - d(x, sx);
                let dv = d(pv, u) + inner_a + d(x, sy) - d(pv, v) - inner_b - d(y, sy);
                let pair = |a: usize, b: usize, f: &dyn Fn(usize) -> f64| if a == b { f(a) } else { f(a) + f(b) };
                let (qa, pa) = (pair(u, x, &|c| inst.demand(c)), pair(u, x, &|c| inst.profit(c)));
                let (qb, pb) = (pair(v, y, &|c| inst.demand(c)), pair(v, y, &|c| inst.profit(c)));
                Some(
                    self.route_change(ru, du, qb - qa, pb - pa)
                        + self.route_change(rv, dv, qa - qb, pa - pb),
                )
            }
            Move::TwoOpt { u, v } => {
                if !self.customer(u) || !self.customer(v) || !self.visited(u) || !self.visited(v) {
                    return None;
                }
                if u == v || self.route_of[u] != self.route_of[v] {
                    return None;
                }
                let (u, v) = if self.pos_of[u] < self.pos_of[v] { (u, v) } else { (v, u) };
                let x = self.succ(u);
                if x == v {
                    return Some(0.0);
                }
                let y = self.succ(v);
                Some(d(u, v) + d(x, y) - d(u, x) - d(v, y))
            }
            Move::TwoOptStar { u, v } => {
                if !self.customer(u) || !self.customer(v) || !self.visited(u) || !self.visited(v) {
                    return None;
                }
                let (ru, rv) = (self.route_of[u], self.route_of[v]);
                if ru == rv {
                    return None;
                }
                let (x, y) = (self.succ(u), self.succ(v));
                if x == 0 && y == 0 {
                    return Some(0.0);
                }
                let (iu, iv) = (self.pos_of[u], self.pos_of[v]);
                let tail_u = self.dist[ru] - self.pre_dist[ru][iu] - d(u, x);
                let tail_v = self.dist[rv] - self.pre_dist[rv][iv] - d(v, y);
                let du = self.pre_dist[ru][iu] + d(u, y) + tail_v;
                let dv = self.pre_dist[rv][iv] + d(v, x) + tail_u;
                let lu = self.pre_load[ru][iu] + self.load[rv] - self.pre_load[rv][iv];
                let lv = self.pre_load[rv][iv] + self.load[ru] - self.pre_load[ru][iu];
                let pu = self.pre_profit[ru][iu] + self.profit[rv] - self.pre_profit[rv][iv];
                let pv = self.pre_profit[rv][iv] + self.profit[ru] - self.pre_profit[ru][iu];
                Some(self.term(du, lu, pu) + self.term(dv, lv, pv) - self.route_term(ru) - self.route_term(rv))
            }
            Move::Remove { u } => {
                if !self.customer(u) || !self.visited(u) {
                    return None;
                }
                let ru = self.route_of[u];
                let (p, s) = (self.pred(u), self.succ(u));
                let rem = d(p, s) - d(p, u) - d(u, s);
                Some(
                    self.route_change(ru, rem, -inst.demand(u), -inst.profit(u))
                        + self.service_change(&[(inst.group_of(u), -inst.weight(u))]),
                )
            }
            Move::Add { v, to } => {
                if !self.customer(v) || self.visited(v) {
                    return None;
                }
                let (rv, a, b) = self.anchor(to)?;
                let ins = d(a, v) + d(v, b) - d(a, b);
                Some(
                    self.route_change(rv, ins, inst.demand(v), inst.profit(v))
                        + self.service_change(&[(inst.group_of(v), inst.weight(v))]),
                )
            }
            Move::Replace { u, v } => {
                if !self.customer(u) || !self.customer(v) || !self.visited(u) || self.visited(v) {
                    return None;
                }
                let ru = self.route_of[u];
                let (p, s) = (self.pred(u), self.succ(u));
                let dd = d(p, v) + d(v, s) - d(p, u) - d(u, s);
                Some(
                    self.route_change(
                        ru,
                        dd,
                        inst.demand(v) - inst.demand(u),
                        inst.profit(v) - inst.profit(u),
                    ) + self.service_change(&[
                        (inst.group_of(u), -inst.weight(u)),
                        (inst.group_of(v), inst.weight(v)),
                    ]),
                )
            }
        }
    }

    /// New sequences of the routes touched by `mv`.
    fn rebuilt(&self, mv: &Move) -> Option<Vec<(usize, Vec<usize>)>> {
        let seq_of = |c: usize| &self.routes[self.route_of[c]];
        Some(match *mv {
            Move::Relocate1 { u, to } | Move::Relocate2 { u, to } => {
                let len = if mv.kind() == MoveKind::Relocate1 { 1 } else { 2 };
                let ru = self.route_of[u];
                let i = self.pos_of[u];
                let mut a = self.routes[ru].clone();
                let seg: Vec<usize> = a.drain(i..i + len).collect();
                let rv = match to {
                    Anchor::After(x) => self.route_of[x],
                    Anchor::RouteStart(r) => r,
                };
                let mut b = if rv == ru { a.clone() } else { self.routes[rv].clone() };
                let at = match to {
                    Anchor::After(x) => b.iter().position(|&c| c == x)? + 1,
                    Anchor::RouteStart(_) => 0,
                };
                b.splice(at..at, seg);
                if rv == ru {
                    vec![(ru, b)]
                } else {
                    vec![(ru, a), (rv, b)]
                }
            }
            Move::Swap11 { u, v } | Move::Swap21 { u, v } | Move::Swap22 { u, v } => {
                let la = if mv.kind() == MoveKind::Swap11 { 1 } else { 2 };
                let lb = if mv.kind() == MoveKind::Swap22 { 2 } else { 1 };
                let (ru, rv) = (self.route_of[u], self.route_of[v]);
                let (i, j) = (self.pos_of[u], self.pos_of[v]);
                if ru == rv {
                    let s = seq_of(u);
                    let (first, second) = if i < j { ((i, la), (j, lb)) } else { ((j, lb), (i, la)) };
                    let mut out = s[..first.0].to_vec();
                    out.extend_from_slice(&s[second.0..second.0 + second.1]);
                    out.extend_from_slice(&s[first.0 + first.1..second.0]);
                    out.extend_from_slice(&s[first.0..first.0 + first.1]);
                    out.extend_from_slice(&s[second.0 + second.1..]);
                    vec![(ru, out)]
                } else {
                    let mut a = self.routes[ru].clone();
                    let mut b = self.routes[rv].clone();
                    let sa: Vec<usize> = a[i..i + la].to_vec();
                    let sb: Vec<usize> = b[j..j + lb].to_vec();
                    a.splice(i..i + la, sb);
                    b.splice(j..j + lb, sa);
                    vec![(ru, a), (rv, b)]
                }
            }
            Move::TwoOpt { u, v } => {
                let (u, v) = if self.pos_of[u] < self.pos_of[v] { (u, v) } else { (v, u) };
                let mut s = seq_of(u).clone();
                s[self.pos_of[u] + 1..=self.pos_of[v]].reverse();
                vec![(self.route_of[u], s)]
            }
            Move::TwoOptStar { u, v } => {
                let (ru, rv) = (self.route_of[u], self.route_of[v]);
                let (a, b) = (&self.routes[ru], &self.routes[rv]);
                let (i, j) = (self.pos_of[u], self.pos_of[v]);
                let mut na = a[..=i].to_vec();
                na.extend_from_slice(&b[j + 1..]);
                let mut nb = b[..=j].to_vec();
                nb.extend_from_slice(&a[i + 1..]);
                vec![(ru, na), (rv, nb)]
            }
            Move::Remove { u } => {
                let mut s = seq_of(u).clone();
                s.remove(self.pos_of[u]);
                vec![(self.route_of[u], s)]
            }
            Move::Add { v, to } => {
                let (r, at) = match to {
                    Anchor::After(x) => (self.route_of[x], self.pos_of[x] + 1),
                    Anchor::RouteStart(r) => (r, 0),
                };
                let mut s = self.routes[r].clone();
                s.insert(at, v);
                vec![(r, s)]
            }
            Move::Replace { u, v } => {
                let mut s = seq_of(u).clone();
                s[self.pos_of[u]] = v;
                vec![(self.route_of[u], s)]
            }
        })
    }

    /// Applies a move accepted by [`State::delta`] and returns the routes it
    /// changed.
    pub fn apply(&mut self, mv: &Move) -> [Option<usize>; 2] {
        let changed = self.rebuilt(mv).expect("move must be applicable");
        let removed = match *mv {
            Move::Remove { u } | Move::Replace { u, .. } => Some(u),
            _ => None,
        };
        let mut touched = [None; 2];
        for (i, (r, seq)) in changed.into_iter().enumerate() {
            self.routes[r] = seq;
            self.refresh(r);
            touched[i] = Some(r);
        }
        if let Some(u) = removed {
            self.route_of[u] = NONE;
            self.pos_of[u] = NONE;
        }
        // recomputed from scratch rather than updated, so sums never drift
        if let Move::Remove { .. } | Move::Add { .. } | Move::Replace { .. } = mv {
            self.resync_delivered();
        }
        touched
    }

    fn resync_delivered(&mut self) {
        self.delivered.iter_mut().for_each(|w| *w = 0.0);
        for seq in &self.routes {
            for &c in seq {
                self.delivered[self.inst.group_of(c)] += self.inst.weight(c);
            }
        }
    }

    pub fn to_solution(&self) -> Solution {
        Solution::from_routes(self.routes.clone(), self.inst, &self.pen)
    }
}
