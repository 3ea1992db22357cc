//! Exhaustive SAW enumeration oracles on small domains (bounding box ≤ 5×5).
//!
//! Sums of the loop-erased weight p̂(η) = p(η)·F(η∘;A) over SAW families are
//! accumulated by depth-first search with bitmask occupancy. The loop factor
//! F is maintained incrementally: F(V;A) = det G_A[V,V], whose unpivoted
//! LDLᵀ pivots are the conditioned Green diagonals, so each DFS push costs
//! O(depth²) and pops are free.

use crate::harmonic::{GreenTable, HarmonicError};
use crate::lattice::{boundary_edges, BoundaryEdge, LatticeDomain, Point, ORIGIN, ONE};
use crate::linalg::{BorderedFactor, DenseLu};
use std::collections::HashMap;

/// Hard cap on enumerable domains: bounding box within 5×5.
pub const MAX_BOX: i32 = 5;

/// Compact indexed view of a small domain with its dense unsigned Green
/// matrix and boundary-edge table.
pub struct SmallDomain {
    pub verts: Vec<Point>,
    pub index: HashMap<Point, usize>,
    /// neighbor vertex indices per vertex
    pub nbr: Vec<Vec<usize>>,
    /// boundary-edge ids per inner vertex
    pub exits: Vec<Vec<usize>>,
    pub edges: Vec<BoundaryEdge>,
    /// dense unsigned Green matrix, row-major
    pub g: Vec<f64>,
    /// log det(I − P), unsigned
    pub log_det: f64,
}

impl SmallDomain {
    pub fn new(a: &LatticeDomain) -> Result<SmallDomain, HarmonicError> {
        let (min, max) = a.bounding_box();
        assert!(
            max.x - min.x + 1 <= MAX_BOX && max.y - min.y + 1 <= MAX_BOX,
            "SmallDomain requires a bounding box within 5x5"
        );
        let mut verts = a.vertices().to_vec();
        verts.sort_by_key(|p| (p.y, p.x));
        let n = verts.len();
        let index: HashMap<Point, usize> =
            verts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let nbr: Vec<Vec<usize>> = verts
            .iter()
            .map(|p| {
                p.neighbors()
                    .iter()
                    .filter_map(|q| index.get(q).copied())
                    .collect()
            })
            .collect();
        // dense (I − P) and its full inverse
        let mut m = vec![0.0f64; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
            for &j in &nbr[i] {
                m[i * n + j] = -0.25;
            }
        }
        let lu = DenseLu::new(n, m)?;
        let (log_det, _) = lu.log_det();
        let mut g = vec![0.0f64; n * n];
        let mut col = vec![0.0f64; n];
        for w in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[w] = 1.0;
            lu.solve(&mut col);
            for z in 0..n {
                g[z * n + w] = col[z];
            }
        }
        let edges = boundary_edges(a);
        let mut exits = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            exits[index[&e.inner]].push(ei);
        }
        Ok(SmallDomain {
            verts,
            index,
            nbr,
            exits,
            edges,
            g,
            log_det,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
}

/// Shared DFS state: the incremental loop-factor, the vertex prefix, and a
/// scratch column buffer (the factor copies what it needs on push).
struct Dfs {
    bf: BorderedFactor,
    prefix: Vec<usize>,
    col: Vec<f64>,
}

impl Dfs {
    fn new(cap: usize) -> Dfs {
        Dfs {
            bf: BorderedFactor::new(cap),
            prefix: Vec::with_capacity(cap),
            col: vec![0.0; cap],
        }
    }

    fn push(&mut self, sd: &SmallDomain, v: usize) {
        let n = sd.verts.len();
        let k = self.prefix.len();
        for (slot, &u) in self.col[..k].iter_mut().zip(self.prefix.iter()) {
            *slot = sd.g[v * n + u];
        }
        self.bf.push(&self.col[..k], sd.g[v * n + v]);
        self.prefix.push(v);
    }

    fn pop(&mut self) {
        self.prefix.pop();
        self.bf.pop();
    }
}

/// Σ_{η ∈ W_SAW(a,b) traversing λ in order} p̂(η;A), for every ordered
/// boundary-edge pair. Entry `[a·nE + b]` sums SAWs that enter at `a`, run
/// to λ's first vertex, traverse λ, and exit at `b`; the reverse traversal
/// of the same undirected SAW is accounted in `[b·nE + a]`.
pub fn through_lambda_sums(sd: &SmallDomain, lambda: &[Point]) -> Vec<f64> {
    let ne = sd.n_edges();
    let mut sums = vec![0.0f64; ne * ne];
    let lam: Vec<usize> = lambda.iter().map(|p| sd.index[p]).collect();
    let mut dfs = Dfs::new(sd.verts.len());
    let mut occupied = 0u32;
    for &v in &lam {
        dfs.push(sd, v);
        occupied |= 1 << v;
    }
    let x0 = lam[0];
    let xk = *lam.last().unwrap();
    // p(η) = 4^{-(jA + jB + |λ| + 1)} with |λ| = #λ-vertices
    let base = 0.25f64.powi(lambda.len() as i32 + 1);
    let mut scratch = vec![0.0f64; ne];
    arm_a(sd, x0, xk, occupied, &mut dfs, base, &mut scratch, &mut sums);
    sums
}

#[allow(clippy::too_many_arguments)]
fn arm_a(
    sd: &SmallDomain,
    tip: usize,
    xk: usize,
    occupied: u32,
    dfs: &mut Dfs,
    weight: f64,
    scratch: &mut [f64],
    sums: &mut [f64],
) {
    if !sd.exits[tip].is_empty() {
        // terminate arm A here; accumulate Σ over arm B completions per b
        scratch.iter_mut().for_each(|v| *v = 0.0);
        arm_b(sd, xk, occupied, dfs, weight, scratch);
        let ne = sd.n_edges();
        for &a in &sd.exits[tip] {
            for (b, &v) in scratch.iter().enumerate() {
                if v != 0.0 {
                    sums[a * ne + b] += v;
                }
            }
        }
    }
    for &u in &sd.nbr[tip] {
        if occupied & (1 << u) != 0 {
            continue;
        }
        dfs.push(sd, u);
        arm_a(
            sd,
            u,
            xk,
            occupied | (1 << u),
            dfs,
            weight * 0.25,
            scratch,
            sums,
        );
        dfs.pop();
    }
}

fn arm_b(
    sd: &SmallDomain,
    tip: usize,
    occupied: u32,
    dfs: &mut Dfs,
    weight: f64,
    acc: &mut [f64],
) {
    let f = dfs.bf.f_value();
    for &b in &sd.exits[tip] {
        acc[b] += weight * f;
    }
    for &u in &sd.nbr[tip] {
        if occupied & (1 << u) != 0 {
            continue;
        }
        dfs.push(sd, u);
        arm_b(sd, u, occupied | (1 << u), dfs, weight * 0.25, acc);
        dfs.pop();
    }
}

/// Σ_{η ∈ W_SAW(a,b)} p̂(η;A) over ALL SAWs for every ordered pair (a,b);
/// the partition identity says each entry equals H_{∂A}(a,b).
pub fn all_pairs_phat_sums(sd: &SmallDomain) -> Vec<f64> {
    let ne = sd.n_edges();
    let mut sums = vec![0.0f64; ne * ne];
    let mut dfs = Dfs::new(sd.verts.len());
    for start in 0..sd.verts.len() {
        if sd.exits[start].is_empty() {
            continue;
        }
        dfs.push(sd, start);
        walk_all(sd, start, start, 1 << start, &mut dfs, 0.25 * 0.25, &mut sums);
        dfs.pop();
    }
    sums
}

fn walk_all(
    sd: &SmallDomain,
    start: usize,
    tip: usize,
    occupied: u32,
    dfs: &mut Dfs,
    weight: f64,
    sums: &mut [f64],
) {
    let ne = sd.n_edges();
    let f = dfs.bf.f_value();
    for &a in &sd.exits[start] {
        for &b in &sd.exits[tip] {
            if a != b {
                sums[a * ne + b] += weight * f;
            }
        }
    }
    for &u in &sd.nbr[tip] {
        if occupied & (1 << u) != 0 {
            continue;
        }
        dfs.push(sd, u);
        walk_all(sd, start, u, occupied | (1 << u), dfs, weight * 0.25, sums);
        dfs.pop();
    }
}

/// Both sides of Fomin's identity for every ordered boundary-edge pair with
/// a₊ ≠ b₊ and no marked inner vertex shared ambiguity. Returns (lhs, rhs)
/// matrices indexed `[a·nE + b]`; entries for excluded pairs are NaN.
pub struct FominSums {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ne: usize,
}

pub fn fomin_sums(a_dom: &LatticeDomain, sd: &SmallDomain) -> Result<FominSums, HarmonicError> {
    let ne = sd.n_edges();
    let k_verts = a_dom.without(&[ORIGIN, ONE]);
    assert!(!k_verts.is_empty(), "Fomin requires K = A minus the marked pair to be nonempty");
    let kt = GreenTable::new_unsigned(&k_verts)?;
    let nk = kt.len();
    let mut gk = vec![0.0f64; nk * nk];
    for (wi, &w) in kt.vertices().iter().enumerate() {
        let col = kt.column(w)?;
        for zi in 0..nk {
            gk[zi * nk + wi] = col[zi];
        }
    }
    let k_index: HashMap<Point, usize> = kt
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i))
        .collect();
    let nbr_k: Vec<Vec<usize>> = kt
        .vertices()
        .iter()
        .map(|p| {
            p.neighbors()
                .iter()
                .filter_map(|q| k_index.get(q).copied())
                .collect()
        })
        .collect();
    // boundary-edge exits located inside K
    let mut exits_k = vec![Vec::new(); nk];
    let mut edge_at_marked = vec![None::<Point>; ne]; // inner vertex when ∈ {0,1}
    for (ei, e) in sd.edges.iter().enumerate() {
        if let Some(&vi) = k_index.get(&e.inner) {
            exits_k[vi].push(ei);
        } else {
            edge_at_marked[ei] = Some(e.inner);
        }
    }
    let z0: Vec<usize> = ORIGIN
        .neighbors()
        .iter()
        .filter_map(|q| k_index.get(q).copied())
        .collect();
    let z1: Vec<usize> = ONE
        .neighbors()
        .iter()
        .filter_map(|q| k_index.get(q).copied())
        .collect();
    // hitting masses h_v(edge) = mass of walks edge → vertex v through K
    let hit = |targets: &[usize], v: Point| -> Vec<f64> {
        let mut out = vec![0.0f64; ne];
        for (ei, e) in sd.edges.iter().enumerate() {
            match edge_at_marked[ei] {
                // direct absorption: [a₊, a₋] with a₋ ∈ {0,1}
                Some(inner) => out[ei] = if inner == v { 0.25 } else { 0.0 },
                None => {
                    let ai = k_index[&e.inner];
                    let s: f64 = targets.iter().map(|&w| gk[ai * nk + w]).sum();
                    out[ei] = s / 16.0;
                }
            }
        }
        out
    };
    let h0 = hit(&z0, ORIGIN);
    let h1 = hit(&z1, ONE);
    let mut rhs = vec![f64::NAN; ne * ne];
    for a in 0..ne {
        for b in 0..ne {
            if sd.edges[a].outer != sd.edges[b].outer {
                rhs[a * ne + b] = h0[a] * h1[b] - h1[a] * h0[b];
            }
        }
    }

    // LHS: loop-erased resummation with exclusion, by DFS over arms from the
    // marked vertices, carrying the Green matrix of K ∖ (arm) updated by the
    // deletion identity G'(x,y) = G(x,y) − G(x,v)G(v,y)/G(v,v).
    let mut lhs = vec![0.0f64; ne * ne];
    for (root, other_sources, sign) in [(ORIGIN, &z1, 1.0f64), (ONE, &z0, -1.0f64)] {
        let mut gstack: Vec<Vec<f64>> = vec![gk.clone()];
        let mut bf = BorderedFactor::new(nk);
        let mut prefix: Vec<usize> = Vec::new();
        // trivial arm: η = [a₊, root]; mass for b unconstrained
        let root_exits: Vec<usize> = sd
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.inner == root)
            .map(|(ei, _)| ei)
            .collect();
        let other_vertex = if root == ORIGIN { ONE } else { ORIGIN };
        accumulate_fomin_masses(
            sd,
            &gstack[0],
            nk,
            &k_index,
            other_sources,
            other_vertex,
            0,
            &root_exits,
            0.25,
            sign,
            &mut lhs,
        );
        // arms into K
        let root_nbrs: Vec<usize> = root
            .neighbors()
            .iter()
            .filter_map(|q| k_index.get(q).copied())
            .collect();
        for &u in &root_nbrs {
            fomin_arm(
                sd,
                &mut gstack,
                nk,
                &k_index,
                &nbr_k,
                &exits_k,
                other_sources,
                other_vertex,
                u,
                1 << u,
                &mut bf,
                &mut prefix,
                0.25 * 0.25,
                sign,
                &gk,
                &mut lhs,
            );
        }
    }
    Ok(FominSums { lhs, rhs, ne })
}

#[allow(clippy::too_many_arguments)]
fn fomin_arm(
    sd: &SmallDomain,
    gstack: &mut Vec<Vec<f64>>,
    nk: usize,
    k_index: &HashMap<Point, usize>,
    nbr_k: &[Vec<usize>],
    exits_k: &[Vec<usize>],
    other_sources: &[usize],
    other_vertex: Point,
    tip: usize,
    occupied: u32,
    bf: &mut BorderedFactor,
    prefix: &mut Vec<usize>,
    weight: f64,
    sign: f64,
    gk: &[f64],
    lhs: &mut [f64],
) {
    // push tip into the loop factor (over G_K) and the deletion stack
    let col: Vec<f64> = prefix.iter().map(|&u| gk[tip * nk + u]).collect();
    bf.push(&col, gk[tip * nk + tip]);
    prefix.push(tip);
    let top = gstack.last().unwrap();
    let mut g2 = top.clone();
    let dv = top[tip * nk + tip];
    for x in 0..nk {
        let gxv = top[x * nk + tip];
        if gxv != 0.0 {
            let f = gxv / dv;
            for y in 0..nk {
                g2[x * nk + y] -= f * top[tip * nk + y];
            }
        }
    }
    gstack.push(g2);

    if !exits_k[tip].is_empty() {
        let phat = weight * bf.f_value();
        accumulate_fomin_masses(
            sd,
            gstack.last().unwrap(),
            nk,
            k_index,
            other_sources,
            other_vertex,
            occupied,
            &exits_k[tip],
            phat,
            sign,
            lhs,
        );
    }
    for &u in &nbr_k[tip] {
        if occupied & (1 << u) != 0 {
            continue;
        }
        fomin_arm(
            sd, gstack, nk, k_index, nbr_k, exits_k, other_sources, other_vertex, u,
            occupied | (1 << u),
            bf, prefix,
            weight * 0.25,
            sign, gk, lhs,
        );
    }
    gstack.pop();
    prefix.pop();
    bf.pop();
}

#[allow(clippy::too_many_arguments)]
fn accumulate_fomin_masses(
    sd: &SmallDomain,
    g_masked: &[f64],
    nk: usize,
    k_index: &HashMap<Point, usize>,
    other_sources: &[usize],
    other_vertex: Point,
    occupied: u32,
    a_exits: &[usize],
    phat: f64,
    sign: f64,
    lhs: &mut [f64],
) {
    let ne = sd.n_edges();
    for (bi, b) in sd.edges.iter().enumerate() {
        let mass = match k_index.get(&b.inner) {
            Some(&bv) => {
                if occupied & (1 << bv) != 0 {
                    0.0
                } else {
                    let s: f64 = other_sources
                        .iter()
                        .filter(|&&w| occupied & (1 << w) == 0)
                        .map(|&w| g_masked[bv * nk + w])
                        .sum();
                    s / 16.0
                }
            }
            None => {
                if b.inner == other_vertex {
                    0.25
                } else {
                    0.0
                }
            }
        };
        if mass == 0.0 {
            continue;
        }
        for &a in a_exits {
            if sd.edges[a].outer != b.outer {
                lhs[a * ne + bi] += sign * phat * mass;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{boundary_poisson, GreenTable};
    use crate::lattice::{standard_domain, validate_domain, DomainSpec};

    #[test]
    fn partition_identity_on_small_domains() {
        for pts in [
            vec![ORIGIN, ONE],
            vec![ORIGIN, ONE, Point::new(0, -1), Point::new(1, -1)],
            standard_domain(&DomainSpec::Square(2)).unwrap().vertices().to_vec(),
        ] {
            let a = validate_domain(&pts).unwrap();
            let sd = SmallDomain::new(&a).unwrap();
            let sums = all_pairs_phat_sums(&sd);
            let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
            let ne = sd.n_edges();
            for ai in 0..ne {
                for bi in 0..ne {
                    if ai == bi {
                        continue;
                    }
                    let h = boundary_poisson(&gt, &sd.edges[ai], &sd.edges[bi]).unwrap();
                    let s = sums[ai * ne + bi];
                    assert!(
                        (s - h).abs() <= 1e-12 + 1e-10 * h,
                        "partition identity: pair {}->{} got {s}, want {h}",
                        sd.edges[ai],
                        sd.edges[bi]
                    );
                }
            }
        }
    }

    #[test]
    fn through_edge_sums_are_partition_restricted() {
        // on {0,1} every SAW from a to b traverses [0,1] iff it enters at one
        // marked vertex and leaves at the other
        let a = validate_domain(&[ORIGIN, ONE]).unwrap();
        let sd = SmallDomain::new(&a).unwrap();
        let through = through_lambda_sums(&sd, &[ORIGIN, ONE]);
        let all = all_pairs_phat_sums(&sd);
        let ne = sd.n_edges();
        for ai in 0..ne {
            for bi in 0..ne {
                if ai == bi {
                    continue;
                }
                let (ea, eb) = (&sd.edges[ai], &sd.edges[bi]);
                let total = through[ai * ne + bi] + through[bi * ne + ai];
                if ea.inner != eb.inner {
                    // must cross the edge [0,1]
                    assert!(
                        (total - all[ai * ne + bi]).abs() < 1e-14,
                        "pair {ea}->{eb}"
                    );
                } else {
                    assert_eq!(total, 0.0, "pair {ea}->{eb} cannot traverse [0,1]");
                }
            }
        }
    }
}
