//! Exact combinatorics of the Farey tessellation and its dual binary tree.
//!
//! Regions of the tree complement are indexed by extended rationals `p/q`
//! with `1/0` standing for infinity. Tree edges are unordered pairs of Farey
//! neighbours, tree vertices are Farey triangles.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A region index `p/q` in lowest terms, `q >= 0`, with infinity as `1/0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyFraction {
    p: i64,
    q: i64,
}

impl FareyFraction {
    pub const ZERO: FareyFraction = FareyFraction { p: 0, q: 1 };
    pub const ONE: FareyFraction = FareyFraction { p: 1, q: 1 };
    pub const INFINITY: FareyFraction = FareyFraction { p: 1, q: 0 };

    /// Normalizes `p/q` to lowest terms with a non-negative denominator.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::InvalidInput("0/0 is not a region".into()));
        }
        if q == 0 {
            return Ok(Self::INFINITY);
        }
        let g = gcd(p, q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Ok(FareyFraction { p, q })
    }

    /// Builds from a vector that is already known to be primitive up to sign.
    pub(crate) fn from_vector(p: i64, q: i64) -> Self {
        Self::new(p, q).expect("primitive Farey vector")
    }

    pub fn integer(n: i64) -> Self {
        FareyFraction { p: n, q: 1 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_infinite(&self) -> bool {
        self.q == 0
    }

    /// The Fibonacci function `|p| + |q|`.
    pub fn fib(&self) -> u64 {
        self.p.unsigned_abs() + self.q.unsigned_abs()
    }

    pub fn to_f64(&self) -> f64 {
        if self.q == 0 {
            f64::INFINITY
        } else {
            self.p as f64 / self.q as f64
        }
    }

    fn det(&self, other: &FareyFraction) -> i128 {
        self.p as i128 * other.q as i128 - other.p as i128 * self.q as i128
    }

    pub fn is_neighbor(&self, other: &FareyFraction) -> bool {
        self.det(other).abs() == 1
    }
}

impl Ord for FareyFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_infinite(), other.is_infinite()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => {
                let l = self.p as i128 * other.q as i128;
                let r = other.p as i128 * self.q as i128;
                l.cmp(&r)
            }
        }
    }
}

impl PartialOrd for FareyFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FareyFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for FareyFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("malformed fraction '{s}'"));
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: i64 = p.parse().map_err(|_| bad())?;
        let q: i64 = q.parse().map_err(|_| bad())?;
        Self::new(p, q)
    }
}

/// Orders regions by `(fib, value)`, the enumeration order used everywhere.
pub fn level_order(a: &FareyFraction, b: &FareyFraction) -> Ordering {
    a.fib().cmp(&b.fib()).then_with(|| a.cmp(b))
}

/// Farey mediant of two neighbours.
pub fn mediant(a: FareyFraction, b: FareyFraction) -> Result<FareyFraction> {
    if !a.is_neighbor(&b) {
        return Err(Error::Precondition(format!("{a} and {b} are not Farey neighbors")));
    }
    Ok(FareyFraction::from_vector(a.p + b.p, a.q + b.q))
}

/// An edge of the dual tree, i.e. an unordered pair of Farey neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeEdge {
    a: FareyFraction,
    b: FareyFraction,
}

impl TreeEdge {
    pub fn new(x: FareyFraction, y: FareyFraction) -> Result<Self> {
        if !x.is_neighbor(&y) {
            return Err(Error::Precondition(format!("{x} and {y} are not Farey neighbors")));
        }
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Ok(TreeEdge { a, b })
    }

    pub fn a(&self) -> FareyFraction {
        self.a
    }

    pub fn b(&self) -> FareyFraction {
        self.b
    }

    pub fn contains(&self, r: &FareyFraction) -> bool {
        self.a == *r || self.b == *r
    }

    /// The two triangles of the tessellation sharing this edge.
    pub fn triangles(&self) -> (Triangle, Triangle) {
        let (m, d) = triangle_completions(*self);
        (Triangle::new(self.a, self.b, m), Triangle::new(self.a, self.b, d))
    }
}

impl fmt::Display for TreeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

/// The mediant and the difference completion of an edge.
pub fn triangle_completions(e: TreeEdge) -> (FareyFraction, FareyFraction) {
    let (a, b) = (e.a, e.b);
    (
        FareyFraction::from_vector(a.p + b.p, a.q + b.q),
        FareyFraction::from_vector(a.p - b.p, a.q - b.q),
    )
}

/// The completion of `e` other than `r`.
pub fn other_completion(e: TreeEdge, r: FareyFraction) -> Result<FareyFraction> {
    let (m, d) = triangle_completions(e);
    if r == m {
        Ok(d)
    } else if r == d {
        Ok(m)
    } else {
        Err(Error::Precondition(format!("{r} does not complete {e}")))
    }
}

/// A vertex of the dual tree: three pairwise-neighbouring regions, sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triangle {
    v: [FareyFraction; 3],
}

impl Triangle {
    fn new(a: FareyFraction, b: FareyFraction, c: FareyFraction) -> Self {
        let mut v = [a, b, c];
        v.sort();
        Triangle { v }
    }

    /// Checked constructor.
    pub fn from_regions(a: FareyFraction, b: FareyFraction, c: FareyFraction) -> Result<Self> {
        if a.is_neighbor(&b) && b.is_neighbor(&c) && a.is_neighbor(&c) {
            Ok(Self::new(a, b, c))
        } else {
            Err(Error::Precondition(format!(
                "{a}, {b}, {c} do not form a Farey triangle"
            )))
        }
    }

    /// The triangle `{0/1, 1/1, 1/0}` carrying the seed triple.
    pub fn base() -> Self {
        Self::new(FareyFraction::ZERO, FareyFraction::ONE, FareyFraction::INFINITY)
    }

    pub fn regions(&self) -> [FareyFraction; 3] {
        self.v
    }

    pub fn contains(&self, r: &FareyFraction) -> bool {
        self.v.contains(r)
    }

    /// The three tree edges at this vertex, each paired with the opposite region.
    pub fn edges(&self) -> [(TreeEdge, FareyFraction); 3] {
        let [a, b, c] = self.v;
        [
            (TreeEdge { a, b }, c),
            (TreeEdge { a, b: c }, b),
            (TreeEdge { a: b, b: c }, a),
        ]
    }

    /// Neighbouring vertex across the edge opposite to `r`.
    pub fn across(&self, r: FareyFraction) -> Result<Triangle> {
        let (e, _) = self
            .edges()
            .into_iter()
            .find(|(_, opp)| *opp == r)
            .ok_or_else(|| Error::Precondition(format!("{r} is not a vertex of the triangle")))?;
        let w = other_completion(e, r)?;
        Ok(Triangle::new(e.a, e.b, w))
    }

    /// The neighbouring vertex one step closer to the base vertex.
    fn parent(&self) -> Option<(TreeEdge, Triangle)> {
        if *self == Triangle::base() {
            return None;
        }
        let youngest = *self.v.iter().max_by(|x, y| level_order(x, y)).expect("three regions");
        let (e, _) = self.edges().into_iter().find(|(_, opp)| *opp == youngest)?;
        let other = other_completion(e, youngest).ok()?;
        Some((e, Triangle::new(e.a, e.b, other)))
    }

    fn ancestry(&self) -> Vec<(Triangle, Option<TreeEdge>)> {
        let mut out = vec![];
        let mut cur = *self;
        loop {
            match cur.parent() {
                Some((e, p)) => {
                    out.push((cur, Some(e)));
                    cur = p;
                }
                None => {
                    out.push((cur, None));
                    return out;
                }
            }
        }
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}, {}}}", self.v[0], self.v[1], self.v[2])
    }
}

/// Edges of the unique tree path between two vertices.
pub fn tree_path(from: Triangle, to: Triangle) -> Vec<TreeEdge> {
    let a = from.ancestry();
    let b = to.ancestry();
    let in_b: BTreeMap<Triangle, usize> = b.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    let mut edges = vec![];
    for (t, e) in &a {
        if let Some(&j) = in_b.get(t) {
            edges.extend(b[..j].iter().filter_map(|(_, e)| *e));
            return edges;
        }
        edges.extend(e);
    }
    unreachable!("every ancestry ends at the base vertex")
}

/// An open arc of the circle `Q ∪ {∞}` running in increasing direction from
/// `start` to `end`, wrapping through infinity when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub start: FareyFraction,
    pub end: FareyFraction,
}

impl Arc {
    pub fn new(start: FareyFraction, end: FareyFraction) -> Self {
        Arc { start, end }
    }

    /// Whether `r` lies strictly inside the arc.
    pub fn contains(&self, r: &FareyFraction) -> bool {
        match self.start.cmp(&self.end) {
            Ordering::Less => self.start < *r && *r < self.end,
            Ordering::Greater => *r > self.start || *r < self.end,
            Ordering::Equal => *r != self.start,
        }
    }

    /// Position of `r` measured from `start`, used to sort points along the arc.
    fn offset_key(&self, r: &FareyFraction) -> (bool, FareyFraction) {
        (*r < self.start, *r)
    }
}

/// A tree edge with a chosen head region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedEdge {
    edge: TreeEdge,
    head: FareyFraction,
}

impl DirectedEdge {
    pub fn new(edge: TreeEdge, head: FareyFraction) -> Result<Self> {
        other_completion(edge, head)?;
        Ok(DirectedEdge { edge, head })
    }

    pub fn edge(&self) -> TreeEdge {
        self.edge
    }

    pub fn head(&self) -> FareyFraction {
        self.head
    }

    pub fn tail(&self) -> FareyFraction {
        other_completion(self.edge, self.head).expect("validated at construction")
    }

    pub fn reverse(&self) -> DirectedEdge {
        DirectedEdge {
            edge: self.edge,
            head: self.tail(),
        }
    }

    /// The two flanking regions, `Ω⁰`.
    pub fn flanks(&self) -> (FareyFraction, FareyFraction) {
        (self.edge.a, self.edge.b)
    }

    fn arc_containing(&self, r: FareyFraction) -> Arc {
        let lo = Arc::new(self.edge.a, self.edge.b);
        if lo.contains(&r) {
            lo
        } else {
            Arc::new(self.edge.b, self.edge.a)
        }
    }

    /// The open arc on the tail side; its rationals form `Ω⁻`.
    pub fn minus_arc(&self) -> Arc {
        self.arc_containing(self.tail())
    }

    /// The open arc on the head side; its rationals form `Ω⁺`.
    pub fn plus_arc(&self) -> Arc {
        self.arc_containing(self.head)
    }

    pub fn in_omega_minus(&self, r: &FareyFraction) -> bool {
        self.minus_arc().contains(r)
    }

    pub fn in_omega_plus(&self, r: &FareyFraction) -> bool {
        self.plus_arc().contains(r)
    }

    pub fn in_omega_zero(&self, r: &FareyFraction) -> bool {
        self.edge.contains(r)
    }

    /// The two directed edges one step further into the tail side.
    pub fn children(&self) -> [DirectedEdge; 2] {
        let w = self.tail();
        let (a, b) = (self.edge.a, self.edge.b);
        [
            DirectedEdge {
                edge: TreeEdge::new(a, w).expect("neighbors"),
                head: b,
            },
            DirectedEdge {
                edge: TreeEdge::new(w, b).expect("neighbors"),
                head: a,
            },
        ]
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}; {} -> {})",
            self.edge.a,
            self.edge.b,
            self.tail(),
            self.head
        )
    }
}

/// One step of the walk down the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Left,
    Right,
}

/// Walk from the base edge `{0/1, 1/0}` to the first triangle containing a region.
///
/// Positive regions start on the triangle `{0/1, 1/1, 1/0}`, negative ones on
/// `{-1/1, 0/1, 1/0}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SternBrocotPath {
    pub negative: bool,
    /// Maximal runs of one direction, none empty.
    runs: Vec<(Move, u64)>,
}

impl SternBrocotPath {
    /// Moves grouped into maximal runs of one direction.
    pub fn runs(&self) -> &[(Move, u64)] {
        &self.runs
    }

    /// Every move in order.
    pub fn moves(&self) -> impl Iterator<Item = Move> + '_ {
        self.runs.iter().flat_map(|&(m, k)| std::iter::repeat_n(m, k as usize))
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|(_, k)| k).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Replays the walk and returns the final triangle.
    pub fn replay(&self) -> Triangle {
        let (l, r) = self.replay_vectors();
        let m = FareyFraction::from_vector(l.0 + r.0, l.1 + r.1);
        Triangle::new(
            FareyFraction::from_vector(l.0, l.1),
            FareyFraction::from_vector(r.0, r.1),
            m,
        )
    }

    /// The final left and right regions of the walk; their mediant is the
    /// region the walk was built for.
    pub fn replay_pair(&self) -> (FareyFraction, FareyFraction) {
        let (l, r) = self.replay_vectors();
        (
            FareyFraction::from_vector(l.0, l.1),
            FareyFraction::from_vector(r.0, r.1),
        )
    }

    // Unnormalized, so the mediant of the walk stays on the walk's side of ∞.
    fn replay_vectors(&self) -> ((i64, i64), (i64, i64)) {
        let (mut l, mut r) = start_pair(self.negative);
        for &(m, k) in &self.runs {
            let k = k as i64;
            match m {
                Move::Left => r = (r.0 + k * l.0, r.1 + k * l.1),
                Move::Right => l = (l.0 + k * r.0, l.1 + k * r.1),
            }
        }
        (l, r)
    }
}

fn start_pair(negative: bool) -> ((i64, i64), (i64, i64)) {
    if negative {
        ((-1, 0), (0, 1))
    } else {
        ((0, 1), (1, 0))
    }
}

/// The canonical walk reaching a triangle that has `r` as a vertex.
///
/// The run lengths are the continued fraction digits of `|p|/q`, the last
/// one less by one; negative regions mirror left and right.
pub fn stern_brocot_path(r: FareyFraction) -> SternBrocotPath {
    let negative = r.p < 0;
    let mut runs = vec![];
    if r.q == 0 || r.p == 0 {
        return SternBrocotPath { negative, runs };
    }
    let (first, second) = if negative {
        (Move::Left, Move::Right)
    } else {
        (Move::Right, Move::Left)
    };
    let (mut a, mut b) = (r.p.unsigned_abs(), r.q as u64);
    let mut dir = first;
    loop {
        let (digit, rem) = (a / b, a % b);
        let k = if rem == 0 { digit - 1 } else { digit };
        if k > 0 {
            runs.push((dir, k));
        }
        if rem == 0 {
            return SternBrocotPath { negative, runs };
        }
        (a, b) = (b, rem);
        dir = if dir == first { second } else { first };
    }
}

/// All regions of Fibonacci level `n` strictly inside `window`, in arc order.
pub fn regions_at_level(n: u64, window: Arc) -> Vec<FareyFraction> {
    let n = n as i64;
    let mut out = vec![];
    for q in 0..=n {
        let a = n - q;
        for p in if a == 0 { vec![0] } else { vec![a, -a] } {
            if gcd(p, q) != 1 {
                continue;
            }
            if q == 0 && p != 1 {
                continue;
            }
            let r = FareyFraction { p, q };
            if window.contains(&r) {
                out.push(r);
            }
        }
    }
    out.sort_by_key(|r| window.offset_key(r));
    out
}

/// A finite connected subtree of the dual tree.
///
/// A single vertex is an empty edge set plus its triangle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeSpec {
    edges: BTreeSet<TreeEdge>,
    anchor: Triangle,
}

impl SubtreeSpec {
    pub fn vertex(t: Triangle) -> Self {
        SubtreeSpec {
            edges: BTreeSet::new(),
            anchor: t,
        }
    }

    pub fn from_edges<I: IntoIterator<Item = TreeEdge>>(edges: I) -> Result<Self> {
        let edges: BTreeSet<TreeEdge> = edges.into_iter().collect();
        let first = *edges
            .iter()
            .next()
            .ok_or_else(|| Error::InvalidInput("empty subtree needs a vertex".into()))?;
        let spec = SubtreeSpec {
            edges,
            anchor: first.triangles().0,
        };
        spec.check_connected()?;
        Ok(spec)
    }

    pub fn edges(&self) -> &BTreeSet<TreeEdge> {
        &self.edges
    }

    pub fn vertices(&self) -> BTreeSet<Triangle> {
        if self.edges.is_empty() {
            return [self.anchor].into_iter().collect();
        }
        self.edges
            .iter()
            .flat_map(|e| {
                let (s, t) = e.triangles();
                [s, t]
            })
            .collect()
    }

    pub fn contains_vertex(&self, t: &Triangle) -> bool {
        if self.edges.is_empty() {
            return self.anchor == *t;
        }
        t.edges().iter().any(|(e, _)| self.edges.contains(e))
    }

    /// Adds an edge that touches the subtree.
    pub fn push_edge(&mut self, e: TreeEdge) -> Result<()> {
        let (s, t) = e.triangles();
        if !self.contains_vertex(&s) && !self.contains_vertex(&t) {
            return Err(Error::Disconnected);
        }
        self.edges.insert(e);
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let verts = self.vertices();
        let mut adj: BTreeMap<Triangle, Vec<Triangle>> = BTreeMap::new();
        for e in &self.edges {
            let (s, t) = e.triangles();
            adj.entry(s).or_default().push(t);
            adj.entry(t).or_default().push(s);
        }
        let start = *verts.iter().next().expect("non-empty");
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in adj.get(&v).into_iter().flatten() {
                if seen.insert(*w) {
                    queue.push_back(*w);
                }
            }
        }
        if seen.len() == verts.len() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }
}

/// Directed edges meeting the subtree exactly at their head endpoint.
pub fn circular_set(t: &SubtreeSpec) -> Result<Vec<DirectedEdge>> {
    t.check_connected()?;
    let mut out = vec![];
    for v in t.vertices() {
        for (e, opp) in v.edges() {
            if !t.edges.contains(&e) {
                out.push(DirectedEdge { edge: e, head: opp });
            }
        }
    }
    out.sort();
    Ok(out)
}
