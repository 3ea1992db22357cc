//! Exact signed and unsigned lattice Green's functions, Poisson kernels,
//! log-determinants, and loop-measure functionals.
//!
//! For a finite A ⊊ ℤ² the transition operator P has entries ±1/4 per edge
//! (the sign taken from the branch-cut table in signed mode) and the Green's
//! function is G = (I − P)^{-1}, so G_A(z,w) = Σ_{ω: z→w, ω ⊂ A} q(ω).
//! Log-determinants of (I − P) give total loop masses: the odd-winding loop
//! mass is m(J_A) = ½·[log det(I−P^q) − log det(I−P)].

use crate::lattice::{BoundaryEdge, EdgeSignTable, LatticeDomain, Point, ORIGIN, ONE};
use crate::linalg::{BandCholesky, BandLu, BorderedFactor, DenseLu, LinalgError};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Largest system factored densely; above this a band factorization
/// (row-major ordering, bandwidth = box width) is used.
const DENSE_LIMIT: usize = 1024;

/// Post-solve residual bound, relative to ‖rhs‖∞.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error("point {0} is outside the domain")]
    OutOfDomain(Point),
    #[error("solve failed: {0}")]
    SolveFailure(String),
}

impl From<LinalgError> for HarmonicError {
    fn from(e: LinalgError) -> Self {
        HarmonicError::SolveFailure(e.to_string())
    }
}

/// Weight mode for the transition operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Unsigned,
    Signed,
}

enum Factor {
    Dense(DenseLu),
    Band(BandLu),
    Chol(BandCholesky),
}

/// Factorization of (I − P) on a vertex set, with cached solved columns and
/// the log-determinant. Immutable after construction; column cache is
/// internally synchronized.
pub struct GreenTable {
    verts: Vec<Point>,
    index: HashMap<Point, usize>,
    /// adjacency with weights q(e) = ±1/4
    adj: Vec<Vec<(usize, f64)>>,
    factor: Factor,
    log_det: f64,
    mode: Mode,
    cache: Mutex<HashMap<usize, Arc<Vec<f64>>>>,
}

impl GreenTable {
    /// Factors (I − P) on the given vertices (unsigned mode).
    pub fn new_unsigned(vertices: &[Point]) -> Result<GreenTable, HarmonicError> {
        Self::build(vertices, None)
    }

    /// Factors (I − P^q) with edge signs from the table.
    pub fn new_signed(
        vertices: &[Point],
        table: &EdgeSignTable,
    ) -> Result<GreenTable, HarmonicError> {
        Self::build(vertices, Some(table))
    }

    pub fn for_domain(
        a: &LatticeDomain,
        mode: Mode,
        table: Option<&EdgeSignTable>,
    ) -> Result<GreenTable, HarmonicError> {
        match mode {
            Mode::Unsigned => Self::new_unsigned(a.vertices()),
            Mode::Signed => Self::new_signed(
                a.vertices(),
                table.expect("signed mode requires an edge sign table"),
            ),
        }
    }

    fn build(vertices: &[Point], table: Option<&EdgeSignTable>) -> Result<GreenTable, HarmonicError> {
        let mut verts = vertices.to_vec();
        verts.sort_by_key(|p| (p.y, p.x));
        verts.dedup();
        let n = verts.len();
        let index: HashMap<Point, usize> = verts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(4); n];
        let mut band = 0usize;
        for (i, &p) in verts.iter().enumerate() {
            for q in p.neighbors() {
                if let Some(&j) = index.get(&q) {
                    let s = table.map_or(1.0, |t| t.sign_f64(p, q));
                    adj[i].push((j, 0.25 * s));
                    band = band.max(i.abs_diff(j));
                }
            }
        }
        let entry = |i: usize, j: usize| -> f64 {
            if i == j {
                1.0
            } else {
                -adj[i].iter().find(|&&(k, _)| k == j).map_or(0.0, |&(_, w)| w)
            }
        };
        let (factor, log_det) = if n <= DENSE_LIMIT {
            let mut m = vec![0.0f64; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
                for &(j, w) in &adj[i] {
                    m[i * n + j] = -w;
                }
            }
            let lu = DenseLu::new(n, m)?;
            let (ld, sign) = lu.log_det();
            if sign <= 0 {
                return Err(HarmonicError::SolveFailure(
                    "det(I - P) must be positive".into(),
                ));
            }
            (Factor::Dense(lu), ld)
        } else if table.is_none() {
            let chol = BandCholesky::new(n, band, entry)?;
            let (ld, _) = chol.log_det();
            (Factor::Chol(chol), ld)
        } else {
            let lu = BandLu::new(n, band, entry)?;
            let (ld, sign) = lu.log_det();
            if sign <= 0 {
                return Err(HarmonicError::SolveFailure(
                    "det(I - P^q) must be positive".into(),
                ));
            }
            (Factor::Band(lu), ld)
        };
        Ok(GreenTable {
            verts,
            index,
            adj,
            factor,
            log_det,
            mode: table.map_or(Mode::Unsigned, |_| Mode::Signed),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.verts
    }

    pub fn contains(&self, p: Point) -> bool {
        self.index.contains_key(&p)
    }

    pub fn index_of(&self, p: Point) -> Option<usize> {
        self.index.get(&p).copied()
    }

    /// log det(I − P).
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    fn raw_solve(&self, b: &mut [f64]) {
        match &self.factor {
            Factor::Dense(f) => f.solve(b),
            Factor::Band(f) => f.solve(b),
            Factor::Chol(f) => f.solve(b),
        }
    }

    /// Applies (I − P) to x.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for i in 0..self.verts.len() {
            for &(j, w) in &self.adj[i] {
                out[i] -= w * x[j];
            }
        }
        out
    }

    /// Solves (I − P) g = rhs with the residual check ‖(I−P)g − rhs‖∞ ≤
    /// RESIDUAL_TOL·‖rhs‖∞, applying one step of iterative refinement if
    /// needed.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, HarmonicError> {
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut g = rhs.to_vec();
        self.raw_solve(&mut g);
        for _ in 0..2 {
            let ax = self.apply(&g);
            let mut rnorm = 0.0f64;
            let mut r = vec![0.0; rhs.len()];
            for i in 0..rhs.len() {
                r[i] = rhs[i] - ax[i];
                rnorm = rnorm.max(r[i].abs());
            }
            if rnorm <= RESIDUAL_TOL * scale {
                return Ok(g);
            }
            self.raw_solve(&mut r);
            for i in 0..rhs.len() {
                g[i] += r[i];
            }
        }
        let ax = self.apply(&g);
        let rnorm = rhs
            .iter()
            .zip(ax.iter())
            .fold(0.0f64, |m, (b, a)| m.max((b - a).abs()));
        if rnorm <= RESIDUAL_TOL * scale {
            Ok(g)
        } else {
            Err(HarmonicError::SolveFailure(format!(
                "residual {rnorm:.3e} exceeds {RESIDUAL_TOL:.1e} after refinement"
            )))
        }
    }

    /// The Green column G(·, w), cached.
    pub fn column(&self, w: Point) -> Result<Arc<Vec<f64>>, HarmonicError> {
        let wi = self
            .index_of(w)
            .ok_or(HarmonicError::OutOfDomain(w))?;
        if let Some(col) = self.cache.lock().unwrap().get(&wi) {
            return Ok(col.clone());
        }
        let mut rhs = vec![0.0; self.verts.len()];
        rhs[wi] = 1.0;
        let col = Arc::new(self.solve(&rhs)?);
        self.cache.lock().unwrap().insert(wi, col.clone());
        Ok(col)
    }

    /// G(z, w).
    pub fn green(&self, z: Point, w: Point) -> Result<f64, HarmonicError> {
        let zi = self.index_of(z).ok_or(HarmonicError::OutOfDomain(z))?;
        Ok(self.column(w)?[zi])
    }
}

/// G_A(z,w) (or G^q in signed mode) via a one-shot factorization.
pub fn green(
    a: &LatticeDomain,
    mode: Mode,
    table: Option<&EdgeSignTable>,
    z: Point,
    w: Point,
) -> Result<f64, HarmonicError> {
    GreenTable::for_domain(a, mode, table)?.green(z, w)
}

/// Interior Poisson kernel H_A(z, b) = (1/4)·G_A(z, b₋), the probability that
/// the walk from z exits A through b.
pub fn interior_poisson(
    gt: &GreenTable,
    z: Point,
    b: &BoundaryEdge,
) -> Result<f64, HarmonicError> {
    Ok(0.25 * gt.green(z, b.inner)?)
}

/// Boundary Poisson kernel H_{∂A}(a, b) = (1/16)·G_A(a₋, b₋).
pub fn boundary_poisson(
    gt: &GreenTable,
    a: &BoundaryEdge,
    b: &BoundaryEdge,
) -> Result<f64, HarmonicError> {
    Ok(gt.green(a.inner, b.inner)? / 16.0)
}

/// log det(I − P) for the chosen mode.
pub fn log_det_i_minus_p(
    a: &LatticeDomain,
    mode: Mode,
    table: Option<&EdgeSignTable>,
) -> Result<f64, HarmonicError> {
    Ok(GreenTable::for_domain(a, mode, table)?.log_det())
}

/// Odd-winding loop mass m(J_A) = ½·[log det(I−P^q) − log det(I−P)] and the
/// identity factor exp{2·m(J_A)} = det(I−P^q)/det(I−P).
pub fn odd_loop_mass(
    a: &LatticeDomain,
    table: &EdgeSignTable,
) -> Result<(f64, f64), HarmonicError> {
    let unsigned = GreenTable::new_unsigned(a.vertices())?;
    let signed = GreenTable::new_signed(a.vertices(), table)?;
    let m = 0.5 * (signed.log_det() - unsigned.log_det());
    Ok((m, (2.0 * m).exp()))
}

/// Loop factor F(V;A) = Π_i G_{A∖{v₁,…,v_{i−1}}}(v_i, v_i), evaluated as the
/// sequence of pivots of the (unpivoted) LDLᵀ of the Green submatrix G[V,V];
/// each pivot is the conditioned diagonal after masking out the prefix, so
/// the product is independent of the order of V.
pub fn loop_factor(v: &[Point], gt: &GreenTable) -> Result<f64, HarmonicError> {
    let mut bf = BorderedFactor::new(v.len());
    let cols: Vec<Arc<Vec<f64>>> = v
        .iter()
        .map(|&p| gt.column(p))
        .collect::<Result<_, _>>()?;
    for (k, &p) in v.iter().enumerate() {
        let pi = gt.index_of(p).unwrap();
        let col: Vec<f64> = (0..k).map(|j| cols[j][pi]).collect();
        bf.push(&col, cols[k][pi]);
    }
    Ok(bf.f_value())
}

/// Signed exit kernels R_A(z,·) for z ∈ {0,1}, precomputed for all boundary
/// edges via two solves on K = A ∖ {0,1}.
///
/// R_A(z,a) = (1/4)·sign(a)·( δ_{z,a₋} + u_z(a₋) ) for z ∈ {0,1}, where
/// u_z(x) = Σ_{y∼z, y∈K} (1/4)·sign([z,y])·G^q_K(x,y); for z ∈ K the kernel
/// is (1/4)·sign(a)·G^q_K(z, a₋). The constraint S[1,τ] ∩ {0,1} = ∅ is
/// realized by solving on K.
pub struct SignedExitTable {
    k_table: GreenTable,
    u0: Vec<f64>,
    u1: Vec<f64>,
    table: EdgeSignTable,
}

impl SignedExitTable {
    pub fn new(a: &LatticeDomain, table: &EdgeSignTable) -> Result<SignedExitTable, HarmonicError> {
        assert!(
            a.contains(ORIGIN) && a.contains(ONE),
            "signed exit kernels require {{0,1}} ⊆ A"
        );
        let k_verts = a.without(&[ORIGIN, ONE]);
        let k_table = GreenTable::new_signed(&k_verts, table)?;
        let source = |z: Point| -> Result<Vec<f64>, HarmonicError> {
            let mut rhs = vec![0.0; k_table.len()];
            for y in z.neighbors() {
                if let Some(yi) = k_table.index_of(y) {
                    rhs[yi] = 0.25 * table.sign_f64(z, y);
                }
            }
            k_table.solve(&rhs)
        };
        let u0 = source(ORIGIN)?;
        let u1 = source(ONE)?;
        Ok(SignedExitTable {
            k_table,
            u0,
            u1,
            table: table.clone(),
        })
    }

    /// R_A(z, a).
    pub fn r(&self, z: Point, a: &BoundaryEdge) -> Result<f64, HarmonicError> {
        let s = 0.25 * self.table.sign_f64(a.inner, a.outer);
        if z == ORIGIN || z == ONE {
            let u = if z == ORIGIN { &self.u0 } else { &self.u1 };
            let direct = if z == a.inner { 1.0 } else { 0.0 };
            let via = match self.k_table.index_of(a.inner) {
                Some(ai) => u[ai],
                None => 0.0, // a₋ ∈ {0,1}: walks through K cannot exit there
            };
            Ok(s * (direct + via))
        } else if let Some(_zi) = self.k_table.index_of(z) {
            Ok(s * self.k_table.green(z, a.inner)?)
        } else {
            Err(HarmonicError::OutOfDomain(z))
        }
    }
}

/// One-shot R_A(z, a).
pub fn signed_exit(
    a: &LatticeDomain,
    table: &EdgeSignTable,
    z: Point,
    edge: &BoundaryEdge,
) -> Result<f64, HarmonicError> {
    SignedExitTable::new(a, table)?.r(z, edge)
}

/// q̄_A = (1/4)·G^q_A(0,0)·G^q_{A∖{0}}(1,1).
pub fn qbar(a: &LatticeDomain, table: &EdgeSignTable) -> Result<f64, HarmonicError> {
    assert!(a.contains(ORIGIN) && a.contains(ONE), "q̄ requires {{0,1}} ⊆ A");
    let full = GreenTable::new_signed(a.vertices(), table)?;
    let minus0 = GreenTable::new_signed(&a.without(&[ORIGIN]), table)?;
    Ok(0.25 * full.green(ORIGIN, ORIGIN)? * minus0.green(ONE, ONE)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        boundary_edges, build_branch_cut, standard_domain, validate_domain, DomainSpec,
        EdgeSignTable, MINUS_I, ONE_MINUS_I,
    };

    fn square(n: u32) -> LatticeDomain {
        standard_domain(&DomainSpec::Square(n)).unwrap()
    }

    #[test]
    fn green_single_vertex() {
        let a = validate_domain(&[ORIGIN]).unwrap();
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        assert!((gt.green(ORIGIN, ORIGIN).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(gt.log_det(), 0.0);
    }

    #[test]
    fn green_two_vertices_exact() {
        let a = validate_domain(&[ORIGIN, ONE]).unwrap();
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        assert!((gt.green(ORIGIN, ORIGIN).unwrap() - 16.0 / 15.0).abs() < 1e-13);
        assert!((gt.green(ORIGIN, ONE).unwrap() - 4.0 / 15.0).abs() < 1e-13);
        // det(I−P) = 15/16 in both modes
        assert!((gt.log_det() - (15.0f64 / 16.0).ln()).abs() < 1e-13);
        let trivial = EdgeSignTable::trivial(&a);
        let gq = GreenTable::new_signed(a.vertices(), &trivial).unwrap();
        assert!((gq.log_det() - (15.0f64 / 16.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn green_symmetry_and_domination() {
        let a = square(3);
        let table = build_branch_cut(&a).unwrap();
        let g = GreenTable::new_unsigned(a.vertices()).unwrap();
        let gq = GreenTable::new_signed(a.vertices(), &table).unwrap();
        let pts = [ORIGIN, ONE, Point::new(2, -2), Point::new(-1, 1), MINUS_I];
        for &z in &pts {
            for &w in &pts {
                let v = g.green(z, w).unwrap();
                let vq = gq.green(z, w).unwrap();
                assert!((v - g.green(w, z).unwrap()).abs() < 1e-12);
                assert!(v >= 0.0);
                assert!(vq.abs() <= v + 1e-12, "|G^q| ≤ G at {z},{w}");
            }
        }
    }

    #[test]
    fn poisson_row_sums() {
        let a = square(4);
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        let edges = boundary_edges(&a);
        for &z in a.vertices() {
            let total: f64 = edges
                .iter()
                .map(|b| interior_poisson(&gt, z, b).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-11, "Σ_b H(z,b) = 1 at z={z}");
        }
        // boundary kernel: symmetry and first-step row sum 1/4
        for a_edge in &edges {
            let total: f64 = edges
                .iter()
                .map(|b| boundary_poisson(&gt, a_edge, b).unwrap())
                .sum();
            assert!((total - 0.25).abs() < 1e-11);
        }
        let h_ab = boundary_poisson(&gt, &edges[0], &edges[5]).unwrap();
        let h_ba = boundary_poisson(&gt, &edges[5], &edges[0]).unwrap();
        assert!((h_ab - h_ba).abs() < 1e-13);
    }

    #[test]
    fn single_vertex_poisson() {
        let a = validate_domain(&[ORIGIN]).unwrap();
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        let edges = boundary_edges(&a);
        assert_eq!(edges.len(), 4);
        for b in &edges {
            assert!((interior_poisson(&gt, ORIGIN, b).unwrap() - 0.25).abs() < 1e-14);
        }
        // unique two-step walk through the center: H_{∂A}(a,b) = 1/16
        for a_edge in &edges {
            for b_edge in &edges {
                if a_edge != b_edge {
                    let h = boundary_poisson(&gt, a_edge, b_edge).unwrap();
                    assert!((h - 1.0 / 16.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dense_and_band_paths_agree() {
        // force the band path by building a domain above the dense limit
        let a = square(17); // 34×34 = 1156 > 1024
        let g_band = GreenTable::new_unsigned(a.vertices()).unwrap();
        // compare a few entries against a dense solve on the same system
        let sub = GreenTable::build(a.vertices(), None).unwrap();
        assert!(sub.len() > DENSE_LIMIT);
        let table = build_branch_cut(&a).unwrap();
        let gq_band = GreenTable::new_signed(a.vertices(), &table).unwrap();
        // spot values vs small-block identities: row sums of H must be 1
        let edges = boundary_edges(&a);
        let total: f64 = edges
            .iter()
            .map(|b| interior_poisson(&g_band, ORIGIN, b).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(gq_band.log_det() >= g_band.log_det() - 1e-12);
    }

    #[test]
    fn odd_loop_mass_examples() {
        let a = validate_domain(&[ORIGIN, ONE]).unwrap();
        let trivial = EdgeSignTable::trivial(&a);
        let (_, exp2m) = odd_loop_mass(&a, &trivial).unwrap();
        assert!((exp2m - 1.0).abs() < 1e-12);

        let b = validate_domain(&[ORIGIN, ONE, MINUS_I, ONE_MINUS_I]).unwrap();
        let table = build_branch_cut(&b).unwrap();
        let (mj, exp2m) = odd_loop_mass(&b, &table).unwrap();
        assert!(mj > 0.0);
        assert!(exp2m > 1.0);
    }

    #[test]
    fn loop_masses_match_rooted_loop_enumeration() {
        // m(J_A) = ½·[log det(I−P^q) − log det(I−P)] against the direct
        // rooted-loop sums Σ_t tr(Pᵗ)/t computed by matrix powers; the
        // spectral radius on the 2×2 domain is ≤ 1/2, so truncating at
        // t = 60 leaves a tail below 1e-18
        let a = validate_domain(&[ORIGIN, ONE, MINUS_I, ONE_MINUS_I]).unwrap();
        let table = build_branch_cut(&a).unwrap();
        let verts = a.vertices();
        let n = verts.len();
        let build = |signed: bool| -> Vec<f64> {
            let mut p = vec![0.0f64; n * n];
            for (i, &u) in verts.iter().enumerate() {
                for (j, &v) in verts.iter().enumerate() {
                    if u.is_neighbor(v) {
                        let s = if signed { table.sign_f64(u, v) } else { 1.0 };
                        p[i * n + j] = 0.25 * s;
                    }
                }
            }
            p
        };
        let matmul = |x: &[f64], y: &[f64]| -> Vec<f64> {
            let mut z = vec![0.0f64; n * n];
            for i in 0..n {
                for k in 0..n {
                    let v = x[i * n + k];
                    if v != 0.0 {
                        for j in 0..n {
                            z[i * n + j] += v * y[k * n + j];
                        }
                    }
                }
            }
            z
        };
        let trace = |x: &[f64]| -> f64 { (0..n).map(|i| x[i * n + i]).sum() };
        let mut total = [0.0f64; 2];
        for (which, signed) in [(0usize, false), (1usize, true)] {
            let p = build(signed);
            let mut pw = p.clone();
            for t in 2..=60 {
                pw = matmul(&pw, &p);
                total[which] += trace(&pw) / t as f64;
            }
        }
        let m_j_enum = 0.5 * (total[0] - total[1]);
        let (m_j, exp2m) = odd_loop_mass(&a, &table).unwrap();
        assert!(
            (m_j - m_j_enum).abs() < 1e-12,
            "loop mass {m_j} vs enumeration {m_j_enum}"
        );
        assert!((exp2m - (2.0 * m_j_enum).exp()).abs() < 1e-12);
        // total unsigned loop mass equals −log det(I−P)
        let ld = log_det_i_minus_p(&a, Mode::Unsigned, None).unwrap();
        assert!((total[0] + ld).abs() < 1e-12, "m[L(A)] = −log det(I−P)");
    }

    #[test]
    fn loop_factor_matches_green_diagonal_and_is_order_free() {
        let a = square(4);
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        for &z in &[ORIGIN, Point::new(2, 1), Point::new(-3, -4)] {
            let f = loop_factor(&[z], &gt).unwrap();
            assert!((f - gt.green(z, z).unwrap()).abs() < 1e-12);
        }
        let v1 = [ORIGIN, Point::new(1, 1), Point::new(-2, 0)];
        let v2 = [Point::new(-2, 0), ORIGIN, Point::new(1, 1)];
        let f1 = loop_factor(&v1, &gt).unwrap();
        let f2 = loop_factor(&v2, &gt).unwrap();
        assert!((f1 - f2).abs() < 1e-10 * f1.abs());
        // F(0;{0}) = 1
        let single = validate_domain(&[ORIGIN]).unwrap();
        let gt1 = GreenTable::new_unsigned(single.vertices()).unwrap();
        assert!((loop_factor(&[ORIGIN], &gt1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn loop_factor_telescopes_by_deletion() {
        // F({u,v};A) = G_A(u,u) · G_{A∖u}(v,v)
        let a = square(3);
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        let (u, v) = (ORIGIN, Point::new(1, 1));
        let f = loop_factor(&[u, v], &gt).unwrap();
        let g_u = gt.green(u, u).unwrap();
        let minus_u = GreenTable::new_unsigned(&a.without(&[u])).unwrap();
        let expect = g_u * minus_u.green(v, v).unwrap();
        assert!((f - expect).abs() < 1e-11 * expect);
    }

    #[test]
    fn qbar_two_vertex_domain() {
        let a = validate_domain(&[ORIGIN, ONE]).unwrap();
        let trivial = EdgeSignTable::trivial(&a);
        let q = qbar(&a, &trivial).unwrap();
        assert!((q - 4.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn signed_exit_three_vertex_example() {
        // A = {0, 1, −1}, a = [0, (0,1)]: only the direct exit survives
        let a = validate_domain(&[ORIGIN, ONE, Point::new(-1, 0)]).unwrap();
        let trivial = EdgeSignTable::trivial(&a);
        let edge = BoundaryEdge {
            inner: ORIGIN,
            outer: Point::new(0, 1),
        };
        let r = signed_exit(&a, &trivial, ORIGIN, &edge).unwrap();
        assert!((r - 0.25).abs() < 1e-14);
    }

    #[test]
    fn signed_exit_dominated_by_poisson() {
        let a = square(4);
        let table = build_branch_cut(&a).unwrap();
        let gt = GreenTable::new_unsigned(a.vertices()).unwrap();
        let exits = SignedExitTable::new(&a, &table).unwrap();
        for b in boundary_edges(&a) {
            for z in [ORIGIN, ONE] {
                let r = exits.r(z, &b).unwrap();
                let h = interior_poisson(&gt, z, &b).unwrap();
                assert!(r.abs() <= h + 1e-12, "|R| ≤ H at z={z} b={b}");
            }
        }
    }

    #[test]
    fn signed_exit_truncated_path_sum_square2() {
        // R_A(0,a) vs a truncated signed sum over walks avoiding {0,1}
        // after the first step, on square:2 (16 vertices).
        let a = square(2);
        let table = build_branch_cut(&a).unwrap();
        let exits = SignedExitTable::new(&a, &table).unwrap();
        let k: Vec<Point> = a.without(&[ORIGIN, ONE]);
        let kset: std::collections::HashSet<Point> = k.iter().copied().collect();
        for b in boundary_edges(&a) {
            // dynamic programming over walk length; the spectral radius of
            // P_K is about 0.8, so 400 steps put the tail below 1e-9
            let mut mass: HashMap<Point, f64> = HashMap::new();
            mass.insert(ORIGIN, 1.0);
            let mut r_sum = 0.0f64;
            for t in 0..=400 {
                // exit contribution at this length
                if let Some(&m) = mass.get(&b.inner) {
                    if t > 0 || b.inner == ORIGIN {
                        r_sum += m * 0.25 * table.sign_f64(b.inner, b.outer);
                    }
                }
                let mut next: HashMap<Point, f64> = HashMap::new();
                for (&x, &m) in &mass {
                    for y in x.neighbors() {
                        if kset.contains(&y) {
                            *next.entry(y).or_insert(0.0) +=
                                m * 0.25 * table.sign_f64(x, y);
                        }
                    }
                }
                mass = next;
            }
            let r = exits.r(ORIGIN, &b).unwrap();
            assert!(
                (r - r_sum).abs() < 1e-9,
                "truncated path sum mismatch at b={b}: {r} vs {r_sum}"
            );
        }
    }

    #[test]
    fn det_ordering_unsigned_vs_signed() {
        for pts in [
            vec![ORIGIN, ONE, MINUS_I, ONE_MINUS_I],
            square(2).vertices().to_vec(),
            square(3).vertices().to_vec(),
        ] {
            let a = validate_domain(&pts).unwrap();
            let table = build_branch_cut(&a).unwrap();
            let du = log_det_i_minus_p(&a, Mode::Unsigned, None).unwrap();
            let ds = log_det_i_minus_p(&a, Mode::Signed, Some(&table)).unwrap();
            assert!(ds >= du - 1e-12, "det(I−P^q) ≥ det(I−P)");
        }
    }
}
