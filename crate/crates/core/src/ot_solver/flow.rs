//! Uncapacitated min-cost flow with real-valued supplies, by the primal
//! network simplex method.
//!
//! The initial basis hangs every node from an artificial root through an
//! artificial arc whose cost exceeds any path cost, so the first tree is
//! feasible for any balanced supply. Pivots keep the tree strongly feasible
//! (the leaving arc is the last blocking arc met when walking the cycle
//! from its apex in the direction of the entering arc), which rules out
//! cycling on degenerate pivots. Entering arcs are chosen by block search.
//!
//! Arcs may be added between runs; the current basis stays valid, so a
//! column-generation loop resumes from where the previous run stopped.
//!
//! Potentials `π` satisfy `c(u,v) + π(u) − π(v) ≥ 0` on every arc and `= 0`
//! on every basic arc (in particular every arc carrying flow) at optimality.

use crate::error::{Error, Result};

/// Reduced costs above `−RC_TOL · artificial cost` count as nonnegative.
const RC_TOL: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct NetworkSimplex {
    nodes: usize,
    zero_tol: f64,
    art_cost: f64,
    cost_bound: f64,
    /// Arcs `0..nodes` are artificial (one per node); real arcs follow.
    tail: Vec<u32>,
    head: Vec<u32>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    parent: Vec<u32>,
    parent_arc: Vec<u32>,
    /// True when the parent arc points from the node to its parent.
    upward: Vec<bool>,
    depth: Vec<u32>,
    pi: Vec<f64>,
    children: Vec<Vec<u32>>,
    child_pos: Vec<u32>,
    next_arc: usize,
    pivots: usize,
}

impl NetworkSimplex {
    /// `supply` must sum to (numerically) zero. `cost_bound` bounds the cost
    /// of every arc that will ever be added.
    pub fn new(supply: &[f64], cost_bound: f64, zero_tol: f64) -> Result<Self> {
        if !(cost_bound.is_finite() && cost_bound >= 0.0) {
            return Err(Error::InvalidConfig(format!("cost bound {cost_bound}")));
        }
        if let Some(b) = supply.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidConfig(format!("supply {b} is not finite")));
        }
        let nodes = supply.len();
        let root = nodes;
        let art_cost = cost_bound.max(1e-300) * (nodes as f64 + 1.0);
        let mut ns = Self {
            nodes,
            zero_tol,
            art_cost,
            cost_bound,
            tail: Vec::with_capacity(nodes),
            head: Vec::with_capacity(nodes),
            cost: Vec::with_capacity(nodes),
            flow: Vec::with_capacity(nodes),
            parent: vec![root as u32; nodes + 1],
            parent_arc: (0..=nodes as u32).collect(),
            upward: vec![false; nodes + 1],
            depth: vec![1; nodes + 1],
            pi: vec![0.0; nodes + 1],
            children: vec![Vec::new(); nodes + 1],
            child_pos: vec![0; nodes + 1],
            next_arc: 0,
            pivots: 0,
        };
        ns.depth[root] = 0;
        for (i, &b) in supply.iter().enumerate() {
            // Strongly feasible start: zero-flow arcs point away from the root.
            if b > 0.0 {
                ns.tail.push(i as u32);
                ns.head.push(root as u32);
                ns.upward[i] = true;
                ns.pi[i] = -art_cost;
            } else {
                ns.tail.push(root as u32);
                ns.head.push(i as u32);
                ns.pi[i] = art_cost;
            }
            ns.cost.push(art_cost);
            ns.flow.push(b.abs());
            ns.child_pos[i] = i as u32;
            ns.children[root].push(i as u32);
        }
        Ok(ns)
    }

    /// Adds a real arc and returns its index among real arcs.
    pub fn add_arc(&mut self, u: usize, v: usize, c: f64) -> Result<usize> {
        if u >= self.nodes || v >= self.nodes {
            return Err(Error::InvalidGraph(format!(
                "arc ({u}, {v}) outside {} nodes",
                self.nodes
            )));
        }
        if !(c.is_finite() && c >= 0.0 && c <= self.cost_bound) {
            return Err(Error::InvalidGraph(format!(
                "arc cost {c} outside [0, {}]",
                self.cost_bound
            )));
        }
        self.tail.push(u as u32);
        self.head.push(v as u32);
        self.cost.push(c);
        self.flow.push(0.0);
        Ok(self.tail.len() - 1 - self.nodes)
    }

    pub fn num_arcs(&self) -> usize {
        self.tail.len() - self.nodes
    }

    /// `(tail, head, cost)` of real arc `k`.
    pub fn arc(&self, k: usize) -> (usize, usize, f64) {
        let k = k + self.nodes;
        (self.tail[k] as usize, self.head[k] as usize, self.cost[k])
    }

    pub fn arc_flow(&self, k: usize) -> f64 {
        self.flow[k + self.nodes]
    }

    /// Node potentials (without the artificial root).
    pub fn potential(&self) -> &[f64] {
        &self.pi[..self.nodes]
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Mass still routed through artificial arcs.
    pub fn artificial_flow(&self) -> f64 {
        self.flow[..self.nodes].iter().sum()
    }

    /// True once no supply needs the artificial arcs.
    pub fn is_feasible(&self) -> bool {
        self.artificial_flow() <= self.zero_tol * (self.nodes as f64 + 1.0)
    }

    /// `Σ flow · cost` over real arcs.
    pub fn cost(&self) -> f64 {
        self.flow[self.nodes..]
            .iter()
            .zip(&self.cost[self.nodes..])
            .map(|(f, c)| f * c)
            .sum()
    }

    fn reduced_cost(&self, k: usize) -> f64 {
        self.cost[k] + self.pi[self.tail[k] as usize] - self.pi[self.head[k] as usize]
    }

    /// Pivots until no arc has negative reduced cost.
    pub fn run(&mut self) {
        let total = self.tail.len();
        if total == 0 {
            return;
        }
        let tol = RC_TOL * self.art_cost;
        let block = ((total as f64).sqrt() as usize).clamp(16, total.max(16));
        let mut scanned = 0;
        let mut k = self.next_arc % total;
        while scanned < total {
            let mut best = -tol;
            let mut entering = None;
            for _ in 0..block {
                let rc = self.reduced_cost(k);
                if rc < best {
                    best = rc;
                    entering = Some(k);
                }
                k += 1;
                if k == total {
                    k = 0;
                }
                scanned += 1;
                if scanned >= total {
                    break;
                }
            }
            if let Some(e) = entering {
                self.pivot(e);
                scanned = 0;
            }
        }
        self.next_arc = k;
    }

    fn pivot(&mut self, e: usize) {
        self.pivots += 1;
        let u = self.tail[e] as usize;
        let v = self.head[e] as usize;

        // Paths from u and v up to the apex.
        let mut up_u = Vec::new();
        let mut up_v = Vec::new();
        let (mut a, mut b) = (u, v);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                up_u.push(a);
                a = self.parent[a] as usize;
            } else {
                up_v.push(b);
                b = self.parent[b] as usize;
            }
        }

        // Flow goes u -> v, up from v to the apex, then down to u. Walking
        // from the apex: down the u side, then up the v side; ties go to
        // the last blocking arc.
        let mut delta = f64::INFINITY;
        let mut leaving: Option<usize> = None;
        for &x in up_u.iter().rev() {
            // Traversed parent -> x: against the arc if it points up.
            if self.upward[x] {
                let f = self.flow[self.parent_arc[x] as usize];
                if f <= delta + self.zero_tol {
                    delta = delta.min(f);
                    leaving = Some(x);
                }
            }
        }
        for &x in &up_v {
            // Traversed x -> parent: against the arc if it points down.
            if !self.upward[x] {
                let f = self.flow[self.parent_arc[x] as usize];
                if f <= delta + self.zero_tol {
                    delta = delta.min(f);
                    leaving = Some(x);
                }
            }
        }
        let q = leaving.expect("arc costs are nonnegative, so every cycle is bounded");
        let delta = delta.max(0.0);

        if delta > 0.0 {
            self.flow[e] += delta;
            for &x in &up_u {
                self.push_tree_arc(x, delta, !self.upward[x]);
            }
            for &x in &up_v {
                self.push_tree_arc(x, delta, self.upward[x]);
            }
        }

        // Re-hang the subtree cut off at q from the entering arc.
        let (inner, outer) = if up_u.contains(&q) { (u, v) } else { (v, u) };
        let mut path = vec![inner];
        while *path.last().expect("nonempty") != q {
            let p = self.parent[*path.last().expect("nonempty")] as usize;
            path.push(p);
        }
        let old_arc: Vec<u32> = path.iter().map(|&x| self.parent_arc[x]).collect();
        let old_up: Vec<bool> = path.iter().map(|&x| self.upward[x]).collect();
        for &x in &path {
            self.detach(x);
        }
        for i in 0..path.len() - 1 {
            let (child, par) = (path[i], path[i + 1]);
            self.parent[par] = child as u32;
            self.parent_arc[par] = old_arc[i];
            self.upward[par] = !old_up[i];
            self.attach(par, child);
        }
        self.parent[inner] = outer as u32;
        self.parent_arc[inner] = e as u32;
        self.upward[inner] = self.tail[e] as usize == inner;
        self.attach(inner, outer);

        // Depths and potentials below the entering arc.
        let mut stack = vec![inner];
        while let Some(x) = stack.pop() {
            let p = self.parent[x] as usize;
            let c = self.cost[self.parent_arc[x] as usize];
            self.depth[x] = self.depth[p] + 1;
            self.pi[x] = if self.upward[x] {
                self.pi[p] - c
            } else {
                self.pi[p] + c
            };
            stack.extend(self.children[x].iter().map(|&c| c as usize));
        }
    }

    /// Moves `delta` along the tree arc of `x`, with or against it.
    fn push_tree_arc(&mut self, x: usize, delta: f64, with: bool) {
        let k = self.parent_arc[x] as usize;
        if with {
            self.flow[k] += delta;
        } else {
            self.flow[k] -= delta;
            if self.flow[k] <= self.zero_tol {
                self.flow[k] = 0.0;
            }
        }
    }

    fn detach(&mut self, x: usize) {
        let p = self.parent[x] as usize;
        let pos = self.child_pos[x] as usize;
        let list = &mut self.children[p];
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.child_pos[moved as usize] = pos as u32;
        }
    }

    fn attach(&mut self, x: usize, p: usize) {
        self.child_pos[x] = self.children[p].len() as u32;
        self.children[p].push(x as u32);
    }
}

/// A fixed arc set with a one-shot solve.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    num_nodes: usize,
    arcs: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    /// Flow per arc, in input order.
    pub flow: Vec<f64>,
    pub potential: Vec<f64>,
    pub cost: f64,
    pub pivots: usize,
}

impl FlowNetwork {
    pub fn from_arcs(num_nodes: usize, arcs: &[(usize, usize, f64)]) -> Result<Self> {
        for &(u, v, c) in arcs {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "arc ({u}, {v}) outside {num_nodes} nodes"
                )));
            }
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "arc cost {c} must be finite and >= 0"
                )));
            }
        }
        Ok(Self {
            num_nodes,
            arcs: arcs.to_vec(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, k: usize) -> (usize, usize, f64) {
        self.arcs[k]
    }

    /// Minimum-cost flow meeting `supply` (positive = source, negative =
    /// sink). Mass below `zero_tol` is treated as zero.
    pub fn solve(&self, supply: &[f64], zero_tol: f64) -> Result<FlowSolution> {
        if supply.len() != self.num_nodes {
            return Err(Error::InvalidConfig(format!(
                "{} supplies for {} nodes",
                supply.len(),
                self.num_nodes
            )));
        }
        let bound = self.arcs.iter().map(|a| a.2).fold(0.0, f64::max);
        let mut ns = NetworkSimplex::new(supply, bound, zero_tol)?;
        for &(u, v, c) in &self.arcs {
            ns.add_arc(u, v, c)?;
        }
        ns.run();
        if !ns.is_feasible() {
            return Err(Error::Infeasible);
        }
        Ok(FlowSolution {
            flow: (0..self.arcs.len()).map(|k| ns.arc_flow(k)).collect(),
            potential: ns.potential().to_vec(),
            cost: ns.cost(),
            pivots: ns.pivots(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_optimality(net: &FlowNetwork, sol: &FlowSolution) {
        for k in 0..net.num_arcs() {
            let (u, v, c) = net.arc(k);
            let rc = c + sol.potential[u] - sol.potential[v];
            assert!(rc >= -1e-9, "arc {k}: reduced cost {rc}");
            if sol.flow[k] > 0.0 {
                assert!(rc.abs() < 1e-9, "active arc {k}: reduced cost {rc}");
            }
        }
    }

    #[test]
    fn routes_along_cheapest_path() {
        // 0 -> 1 -> 2 costs 2, 0 -> 2 costs 3.
        let net = FlowNetwork::from_arcs(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]).unwrap();
        let sol = net.solve(&[1.0, 0.0, -1.0], 1e-15).unwrap();
        assert!((sol.cost - 2.0).abs() < 1e-12);
        check_optimality(&net, &sol);
    }

    #[test]
    fn small_transportation_problem() {
        // Sources 0, 1; sinks 2, 3. Optimum sends 0->2 and 1->3.
        let arcs = [(0, 2, 1.0), (0, 3, 1.0), (1, 2, 10.0), (1, 3, 2.0)];
        let net = FlowNetwork::from_arcs(4, &arcs).unwrap();
        let sol = net.solve(&[1.0, 1.0, -1.0, -1.0], 1e-15).unwrap();
        assert!((sol.cost - 3.0).abs() < 1e-12);
        check_optimality(&net, &sol);
    }

    #[test]
    fn infeasible_supply_is_reported() {
        let net = FlowNetwork::from_arcs(2, &[(1, 0, 1.0)]).unwrap();
        assert!(matches!(net.solve(&[1.0, -1.0], 1e-15), Err(Error::Infeasible)));
    }

    #[test]
    fn resumes_after_adding_arcs() {
        let mut ns = NetworkSimplex::new(&[2.0, -1.0, -1.0], 5.0, 1e-15).unwrap();
        ns.add_arc(0, 1, 1.0).unwrap();
        ns.run();
        assert!(!ns.is_feasible());
        ns.add_arc(0, 2, 5.0).unwrap();
        ns.add_arc(1, 2, 1.0).unwrap();
        ns.run();
        assert!(ns.is_feasible());
        assert!((ns.cost() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_brute_force_assignment() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 5;
            let c: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let arcs: Vec<_> = (0..n * n).map(|k| (k / n, n + k % n, c[k])).collect();
            let mut supply = vec![1.0; n];
            supply.extend(vec![-1.0; n]);
            let net = FlowNetwork::from_arcs(2 * n, &arcs).unwrap();
            let sol = net.solve(&supply, 1e-15).unwrap();
            check_optimality(&net, &sol);
            let mut best = f64::INFINITY;
            let mut perm: Vec<usize> = (0..n).collect();
            permute(&mut perm, 0, &mut |p| {
                let v: f64 = p.iter().enumerate().map(|(i, &j)| c[i * n + j]).sum();
                best = best.min(v);
            });
            assert!((sol.cost - best).abs() < 1e-12);
        }
    }

    fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            visit(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, visit);
            p.swap(k, i);
        }
    }
}
