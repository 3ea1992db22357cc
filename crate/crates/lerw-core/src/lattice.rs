//! Lattice domains, boundary edges, and the branch cut defining the signed
//! weight Q.
//!
//! A domain A is a finite simply connected subset of ℤ² (both A and its
//! complement induce connected subgraphs). The dual lattice is ℤ² + w₀ with
//! w₀ = (1/2, −1/2); a branch cut is a simple dual path from w₀ to the
//! exterior of the union-of-unit-squares region D_A. Every primal edge the
//! cut crosses carries sign −1, every other edge +1, and the sign of a
//! lattice loop equals the parity of its winding number about w₀.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// A vertex of ℤ², written as z = x + iy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

pub const ORIGIN: Point = Point { x: 0, y: 0 };
/// The vertex 1 = (1,0); the marked edge is [ORIGIN, ONE].
pub const ONE: Point = Point { x: 1, y: 0 };
/// −i = (0,−1).
pub const MINUS_I: Point = Point { x: 0, y: -1 };
/// 1−i = (1,−1).
pub const ONE_MINUS_I: Point = Point { x: 1, y: -1 };

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    pub fn neighbors(self) -> [Point; 4] {
        [
            Point::new(self.x + 1, self.y),
            Point::new(self.x - 1, self.y),
            Point::new(self.x, self.y + 1),
            Point::new(self.x, self.y - 1),
        ]
    }

    pub fn is_neighbor(self, other: Point) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// An undirected lattice edge, stored with endpoints in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: Point,
    pub b: Point,
}

impl Edge {
    pub fn new(a: Point, b: Point) -> Self {
        debug_assert!(a.is_neighbor(b), "not a lattice edge: {a} {b}");
        if a <= b {
            Edge { a, b }
        } else {
            Edge { a: b, b: a }
        }
    }
}

/// The marked edge [0,1].
pub fn marked_edge() -> Edge {
    Edge::new(ORIGIN, ONE)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("domain is empty")]
    Empty,
    #[error("domain does not contain the origin")]
    MissingOrigin,
    #[error("domain is not connected")]
    Disconnected,
    #[error("complement is not connected (domain has a hole)")]
    ComplementDisconnected,
    #[error("size too small for constructor `{0}`")]
    SizeTooSmall(String),
    #[error("unknown domain descriptor `{0}`")]
    UnknownDescriptor(String),
    #[error("branch point w0 is not interior: {{0,1,-i,1-i}} must lie in the domain")]
    BranchPointOnBoundary,
    #[error("walk is not a loop (endpoints differ)")]
    NotALoop,
    #[error("edge outside domain: {0} {1}")]
    EdgeOutsideDomain(Point, Point),
    #[error("points lie in different components of the region")]
    Unreachable,
    #[error("domain file error: {0}")]
    File(String),
}

/// A finite simply connected subset of ℤ².
///
/// `contains_origin` records membership of 0; constructors for rectangles and
/// slit squares produce domains without the origin, while [`validate_domain`]
/// (the gate for membership in the class 𝒜) requires it.
#[derive(Debug, Clone)]
pub struct LatticeDomain {
    vertices: Vec<Point>,
    set: HashSet<Point>,
    min: Point,
    max: Point,
    pub contains_origin: bool,
}

impl LatticeDomain {
    /// Builds a domain from arbitrary points, checking connectivity of the
    /// induced subgraph and of the complement, but not origin membership.
    pub fn connected_region(points: &[Point]) -> Result<LatticeDomain, DomainError> {
        if points.is_empty() {
            return Err(DomainError::Empty);
        }
        let set: HashSet<Point> = points.iter().copied().collect();
        if !is_connected(&set) {
            return Err(DomainError::Disconnected);
        }
        if !complement_connected(&set) {
            return Err(DomainError::ComplementDisconnected);
        }
        let mut vertices: Vec<Point> = set.iter().copied().collect();
        vertices.sort();
        let min = Point::new(
            vertices.iter().map(|p| p.x).min().unwrap(),
            vertices.iter().map(|p| p.y).min().unwrap(),
        );
        let max = Point::new(
            vertices.iter().map(|p| p.x).max().unwrap(),
            vertices.iter().map(|p| p.y).max().unwrap(),
        );
        let contains_origin = set.contains(&ORIGIN);
        Ok(LatticeDomain {
            vertices,
            set,
            min,
            max,
            contains_origin,
        })
    }

    /// Constructor for point sets whose connectivity has already been
    /// established (e.g. by the bitmask corpus enumeration); skips the
    /// flood-fill checks.
    pub fn from_validated(points: &[Point]) -> LatticeDomain {
        let set: HashSet<Point> = points.iter().copied().collect();
        let mut vertices: Vec<Point> = points.to_vec();
        vertices.sort();
        vertices.dedup();
        let min = Point::new(
            vertices.iter().map(|p| p.x).min().unwrap(),
            vertices.iter().map(|p| p.y).min().unwrap(),
        );
        let max = Point::new(
            vertices.iter().map(|p| p.x).max().unwrap(),
            vertices.iter().map(|p| p.y).max().unwrap(),
        );
        let contains_origin = set.contains(&ORIGIN);
        LatticeDomain {
            vertices,
            set,
            min,
            max,
            contains_origin,
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn contains(&self, p: Point) -> bool {
        self.set.contains(&p)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Bounding box corners (min, max), inclusive.
    pub fn bounding_box(&self) -> (Point, Point) {
        (self.min, self.max)
    }

    /// The domain with the given vertices removed. The result may be
    /// disconnected; it is still a valid state space for the killed walk.
    pub fn without(&self, removed: &[Point]) -> Vec<Point> {
        self.vertices
            .iter()
            .copied()
            .filter(|p| !removed.contains(p))
            .collect()
    }
}

fn is_connected(set: &HashSet<Point>) -> bool {
    let start = *set.iter().next().unwrap();
    let mut seen = HashSet::with_capacity(set.len());
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        for q in p.neighbors() {
            if set.contains(&q) && seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    seen.len() == set.len()
}

/// Complement connectivity, checked on the bounding box enlarged by one frame:
/// every non-domain cell of the frame-extended box must reach the frame.
fn complement_connected(set: &HashSet<Point>) -> bool {
    let min_x = set.iter().map(|p| p.x).min().unwrap() - 1;
    let max_x = set.iter().map(|p| p.x).max().unwrap() + 1;
    let min_y = set.iter().map(|p| p.y).min().unwrap() - 1;
    let max_y = set.iter().map(|p| p.y).max().unwrap() + 1;
    let w = (max_x - min_x + 1) as usize;
    let h = (max_y - min_y + 1) as usize;
    let idx = |p: Point| ((p.y - min_y) as usize) * w + (p.x - min_x) as usize;
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    // The frame is entirely outside the domain and connected; flood from it.
    let corner = Point::new(min_x, min_y);
    seen[idx(corner)] = true;
    queue.push_back(corner);
    let mut reached = 1usize;
    while let Some(p) = queue.pop_front() {
        for q in p.neighbors() {
            if q.x < min_x || q.x > max_x || q.y < min_y || q.y > max_y {
                continue;
            }
            if set.contains(&q) || seen[idx(q)] {
                continue;
            }
            seen[idx(q)] = true;
            reached += 1;
            queue.push_back(q);
        }
    }
    reached == w * h - set.len()
}

/// Accepts a point set as a member of the class 𝒜: finite, nonempty,
/// containing the origin, connected, with connected complement.
pub fn validate_domain(points: &[Point]) -> Result<LatticeDomain, DomainError> {
    if points.is_empty() {
        return Err(DomainError::Empty);
    }
    if !points.contains(&ORIGIN) {
        return Err(DomainError::MissingOrigin);
    }
    LatticeDomain::connected_region(points)
}

/// Descriptor for the standard domain constructors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainSpec {
    /// {x+iy : −n+1 ≤ x ≤ n, −n ≤ y ≤ n−1}; D_A is the square of side 2n
    /// centered at w₀.
    Square(u32),
    /// {j+ik : 1 ≤ j ≤ n−1, 1 ≤ k ≤ m−1}.
    Rect(u32, u32),
    /// U_n ∖ {0,…,n} with U_n = {|x| < n, |y| < n}.
    SlitSquare(u32),
    File(String),
}

impl DomainSpec {
    pub fn parse(s: &str) -> Result<DomainSpec, DomainError> {
        let err = || DomainError::UnknownDescriptor(s.to_string());
        if let Some(rest) = s.strip_prefix("square:") {
            return rest.parse().map(DomainSpec::Square).map_err(|_| err());
        }
        if let Some(rest) = s.strip_prefix("rect:") {
            let (n, m) = rest.split_once(['x', 'X']).ok_or_else(err)?;
            return Ok(DomainSpec::Rect(
                n.parse().map_err(|_| err())?,
                m.parse().map_err(|_| err())?,
            ));
        }
        if let Some(rest) = s.strip_prefix("slit-square:") {
            return rest.parse().map(DomainSpec::SlitSquare).map_err(|_| err());
        }
        if let Some(rest) = s.strip_prefix("file:") {
            return Ok(DomainSpec::File(rest.to_string()));
        }
        Err(err())
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Square(n) => write!(f, "square:{n}"),
            DomainSpec::Rect(n, m) => write!(f, "rect:{n}x{m}"),
            DomainSpec::SlitSquare(n) => write!(f, "slit-square:{n}"),
            DomainSpec::File(p) => write!(f, "file:{p}"),
        }
    }
}

/// JSON schema for domain files: {"vertices": [[x,y], ...]}.
#[derive(Serialize, Deserialize)]
struct DomainFile {
    vertices: Vec<(i32, i32)>,
}

/// Builds one of the standard domains.
pub fn standard_domain(spec: &DomainSpec) -> Result<LatticeDomain, DomainError> {
    match spec {
        DomainSpec::Square(n) => {
            if *n < 2 {
                return Err(DomainError::SizeTooSmall(spec.to_string()));
            }
            let n = *n as i32;
            let mut pts = Vec::with_capacity((2 * n * 2 * n) as usize);
            for x in (-n + 1)..=n {
                for y in -n..=(n - 1) {
                    pts.push(Point::new(x, y));
                }
            }
            validate_domain(&pts)
        }
        DomainSpec::Rect(n, m) => {
            if *n < 3 || *m < 3 {
                return Err(DomainError::SizeTooSmall(spec.to_string()));
            }
            let (n, m) = (*n as i32, *m as i32);
            let mut pts = Vec::new();
            for j in 1..n {
                for k in 1..m {
                    pts.push(Point::new(j, k));
                }
            }
            LatticeDomain::connected_region(&pts)
        }
        DomainSpec::SlitSquare(n) => {
            if *n < 2 {
                return Err(DomainError::SizeTooSmall(spec.to_string()));
            }
            let n = *n as i32;
            let mut pts = Vec::new();
            for x in (-n + 1)..n {
                for y in (-n + 1)..n {
                    if y == 0 && x >= 0 {
                        continue; // slit {0,…,n}
                    }
                    pts.push(Point::new(x, y));
                }
            }
            LatticeDomain::connected_region(&pts)
        }
        DomainSpec::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| DomainError::File(format!("{path}: {e}")))?;
            let parsed: DomainFile = serde_json::from_str(&text)
                .map_err(|e| DomainError::File(format!("{path}: {e}")))?;
            let pts: Vec<Point> = parsed
                .vertices
                .iter()
                .map(|&(x, y)| Point::new(x, y))
                .collect();
            validate_domain(&pts)
        }
    }
}

/// An ordered pair [a₋, a₊] with a₋ ∈ A, a₊ ∉ A, |a₋ − a₊| = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub inner: Point,
    pub outer: Point,
}

impl BoundaryEdge {
    /// Doubled midpoint (a₋ + a₊), integer-valued.
    pub fn midpoint2(&self) -> (i32, i32) {
        (self.inner.x + self.outer.x, self.inner.y + self.outer.y)
    }

    /// Midpoint of the edge, a point of ∂D_A.
    pub fn midpoint(&self) -> (f64, f64) {
        let (mx, my) = self.midpoint2();
        (mx as f64 / 2.0, my as f64 / 2.0)
    }

    pub fn edge(&self) -> Edge {
        Edge::new(self.inner, self.outer)
    }
}

impl fmt::Display for BoundaryEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.inner, self.outer)
    }
}

/// All boundary edges of A, ordered lexicographically by midpoint.
pub fn boundary_edges(a: &LatticeDomain) -> Vec<BoundaryEdge> {
    let mut out = Vec::new();
    for &p in a.vertices() {
        for q in p.neighbors() {
            if !a.contains(q) {
                out.push(BoundaryEdge { inner: p, outer: q });
            }
        }
    }
    out.sort_by_key(|b| b.midpoint2());
    out
}

/// A dual-lattice vertex, stored in offset coordinates: `d` denotes the
/// plane point (d.x + 1/2, d.y − 1/2), so (0,0) is w₀ itself.
pub type DualPoint = Point;

/// Real-plane coordinates of a dual point.
pub fn dual_coords(d: DualPoint) -> (f64, f64) {
    (d.x as f64 + 0.5, d.y as f64 - 0.5)
}

/// The four primal vertices surrounding a dual point.
fn dual_corners(d: DualPoint) -> [Point; 4] {
    [
        Point::new(d.x, d.y),
        Point::new(d.x + 1, d.y),
        Point::new(d.x, d.y - 1),
        Point::new(d.x + 1, d.y - 1),
    ]
}

/// The primal edge crossed by the dual step d → d + step.
fn crossed_edge(d: DualPoint, step: (i32, i32)) -> Edge {
    match step {
        (1, 0) => Edge::new(Point::new(d.x + 1, d.y), Point::new(d.x + 1, d.y - 1)),
        (-1, 0) => Edge::new(Point::new(d.x, d.y), Point::new(d.x, d.y - 1)),
        (0, 1) => Edge::new(Point::new(d.x, d.y), Point::new(d.x + 1, d.y)),
        (0, -1) => Edge::new(Point::new(d.x, d.y - 1), Point::new(d.x + 1, d.y - 1)),
        _ => unreachable!("not a unit dual step"),
    }
}

/// Preferred first direction for the branch-cut search; fixes the
/// deterministic tie-break of the BFS. `Down` is the canonical choice and
/// yields the straight-down ray on square domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutDirection {
    Down,
    Left,
    Right,
    Up,
}

impl CutDirection {
    fn order(self) -> [(i32, i32); 4] {
        let down = (0, -1);
        let left = (-1, 0);
        let right = (1, 0);
        let up = (0, 1);
        match self {
            CutDirection::Down => [down, left, right, up],
            CutDirection::Left => [left, down, up, right],
            CutDirection::Right => [right, up, down, left],
            CutDirection::Up => [up, right, left, down],
        }
    }
}

/// The branch cut and the induced ±1 edge signs.
///
/// `cut_path` is a simple dual path from w₀ whose intermediate points are
/// strictly interior to D_A and whose last point is not; each traversed dual
/// segment crosses one primal edge, recorded in `crossed`. Edges not crossed
/// carry sign +1; the marked edge [0,1] is never crossed.
#[derive(Debug, Clone)]
pub struct EdgeSignTable {
    pub cut_path: Vec<DualPoint>,
    crossed: HashSet<Edge>,
    domain: LatticeDomain,
}

impl EdgeSignTable {
    /// Sign Q(e) of an undirected edge: −1 iff the cut crosses it.
    pub fn sign(&self, a: Point, b: Point) -> i32 {
        if self.crossed.contains(&Edge::new(a, b)) {
            -1
        } else {
            1
        }
    }

    pub fn sign_f64(&self, a: Point, b: Point) -> f64 {
        self.sign(a, b) as f64
    }

    pub fn crossed_edges(&self) -> &HashSet<Edge> {
        &self.crossed
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    /// A table with no cut (all signs +1). Appropriate when w₀ fails to be
    /// interior to D_A, in which case no loop can wind about w₀ and the
    /// signed weights coincide with the unsigned ones.
    pub fn trivial(domain: &LatticeDomain) -> EdgeSignTable {
        EdgeSignTable {
            cut_path: Vec::new(),
            crossed: HashSet::new(),
            domain: domain.clone(),
        }
    }
}

/// Builds the canonical branch cut (down-preference BFS).
pub fn build_branch_cut(a: &LatticeDomain) -> Result<EdgeSignTable, DomainError> {
    build_branch_cut_with(a, CutDirection::Down)
}

/// Builds a branch cut as the shortest dual path from w₀ to the first dual
/// point not strictly interior to D_A, by BFS with the given deterministic
/// direction preference. The dual edge crossing [0,1] is removed from the
/// search graph, so sign([0,1]) = +1 always.
pub fn build_branch_cut_with(
    a: &LatticeDomain,
    dir: CutDirection,
) -> Result<EdgeSignTable, DomainError> {
    let interior =
        |d: DualPoint| -> bool { dual_corners(d).iter().all(|&p| a.contains(p)) };
    let start = Point::new(0, 0); // w₀ in dual offset coordinates
    if !interior(start) {
        return Err(DomainError::BranchPointOnBoundary);
    }
    let order = dir.order();
    let mut parent: HashMap<DualPoint, DualPoint> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(start, start);
    queue.push_back(start);
    let mut goal = None;
    'bfs: while let Some(d) = queue.pop_front() {
        for &step in &order {
            // The step w₀ → (0.5, 0.5) crosses [0,1]; it is deleted.
            if d == start && step == (0, 1) {
                continue;
            }
            let nd = Point::new(d.x + step.0, d.y + step.1);
            if parent.contains_key(&nd) {
                continue;
            }
            parent.insert(nd, d);
            if !interior(nd) {
                goal = Some(nd);
                break 'bfs;
            }
            queue.push_back(nd);
        }
    }
    let goal = goal.expect("a finite domain always has an exterior dual point");
    let mut path = vec![goal];
    let mut cur = goal;
    while cur != start {
        cur = parent[&cur];
        path.push(cur);
    }
    path.reverse();
    let mut crossed = HashSet::with_capacity(path.len());
    for pair in path.windows(2) {
        let step = (pair[1].x - pair[0].x, pair[1].y - pair[0].y);
        crossed.insert(crossed_edge(pair[0], step));
    }
    debug_assert!(!crossed.contains(&marked_edge()));
    Ok(EdgeSignTable {
        cut_path: path,
        crossed,
        domain: a.clone(),
    })
}

/// A finite nearest-neighbor walk ω = [ω₀,…,ω_τ].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    points: Vec<Point>,
}

impl Walk {
    pub fn new(points: Vec<Point>) -> Walk {
        assert!(!points.is_empty(), "a walk has at least one point");
        for pair in points.windows(2) {
            assert!(
                pair[0].is_neighbor(pair[1]),
                "walk step {} -> {} is not nearest-neighbor",
                pair[0],
                pair[1]
            );
        }
        Walk { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Length τ (number of steps).
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// p(ω) = 4^{−τ}.
    pub fn p_weight(&self) -> f64 {
        0.25f64.powi(self.len() as i32)
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.first() == self.last()
    }

    /// Whether the walk traverses the undirected edge {a,b}.
    pub fn traverses(&self, a: Point, b: Point) -> bool {
        self.points
            .windows(2)
            .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
    }
}

/// A self-avoiding walk: a [`Walk`] with all vertices distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saw {
    walk: Walk,
}

impl Saw {
    pub fn new(points: Vec<Point>) -> Saw {
        let walk = Walk::new(points);
        let set: HashSet<Point> = walk.points().iter().copied().collect();
        assert!(set.len() == walk.points().len(), "walk revisits a vertex");
        Saw { walk }
    }

    pub(crate) fn from_walk_unchecked(walk: Walk) -> Saw {
        Saw { walk }
    }

    pub fn walk(&self) -> &Walk {
        &self.walk
    }

    pub fn points(&self) -> &[Point] {
        self.walk.points()
    }
}

/// Sign of a loop ℓ ⊂ A: the product of edge signs along ℓ, which equals
/// (−1)^{winding number of ℓ about w₀}.
pub fn loop_sign(table: &EdgeSignTable, walk: &Walk) -> Result<i32, DomainError> {
    if !walk.is_closed() {
        return Err(DomainError::NotALoop);
    }
    let mut sign = 1;
    for pair in walk.points().windows(2) {
        if !table.domain.contains(pair[0]) || !table.domain.contains(pair[1]) {
            return Err(DomainError::EdgeOutsideDomain(pair[0], pair[1]));
        }
        sign *= table.sign(pair[0], pair[1]);
    }
    Ok(sign)
}

/// Winding number of a closed lattice walk about the dual point w₀,
/// computed directly from the polygonal curve. Independent oracle for
/// [`loop_sign`].
pub fn winding_number(walk: &Walk) -> Result<i32, DomainError> {
    if !walk.is_closed() {
        return Err(DomainError::NotALoop);
    }
    let (wx, wy) = (0.5f64, -0.5f64);
    let mut total = 0.0f64;
    for pair in walk.points().windows(2) {
        let a = (pair[0].x as f64 - wx, pair[0].y as f64 - wy);
        let b = (pair[1].x as f64 - wx, pair[1].y as f64 - wy);
        let cross = a.0 * b.1 - a.1 * b.0;
        let dot = a.0 * b.0 + a.1 * b.1;
        total += cross.atan2(dot);
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i32)
}

/// Crossing parity between z and w inside the region: +1 if some lattice path
/// from z to w within the region avoids all crossed edges, −1 if z and w are
/// connected in the region but every such path crosses the cut an odd number
/// of times. Computed via connected components of the region's edge graph
/// with crossed edges removed.
pub fn parity_between(
    region: &[Point],
    table: &EdgeSignTable,
    z: Point,
    w: Point,
) -> Result<i32, DomainError> {
    if z == w {
        return Ok(1);
    }
    let set: HashSet<Point> = region.iter().copied().collect();
    assert!(set.contains(&z) && set.contains(&w), "z, w must lie in the region");
    let comp_positive = component_of(&set, z, |a, b| table.sign(a, b) > 0);
    if comp_positive.contains(&w) {
        return Ok(1);
    }
    let comp_all = component_of(&set, z, |_, _| true);
    if comp_all.contains(&w) {
        Ok(-1)
    } else {
        Err(DomainError::Unreachable)
    }
}

fn component_of(
    set: &HashSet<Point>,
    start: Point,
    mut admit: impl FnMut(Point, Point) -> bool,
) -> HashSet<Point> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        for q in p.neighbors() {
            if set.contains(&q) && admit(p, q) && !seen.contains(&q) {
                if seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
    }
    seen
}
