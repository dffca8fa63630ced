//! μ-Markoff maps: construction, evaluation on regions, fan closed forms,
//! edge orientation, pruned searches for small values and the attracting
//! subtree.

use crate::error::{Error, Result};
use crate::farey::{
    circular_set, level_order, other_completion, stern_brocot_path, triangle_completions, DirectedEdge, FareyFraction,
    Move, SubtreeSpec, TreeEdge, Triangle,
};
use crate::functions::{c, csqrt_conv, Kernels, ModulusParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::PI;

/// Runs of at least this many equal turns are evaluated in closed form.
pub const FAN_THRESHOLD: u64 = 64;

/// Flank moduli must exceed this before the growth prune applies.
pub const PRUNE_MARGIN: f64 = 2.0 + 1e-9;

/// A 2×2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn det(a: &Matrix2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn trace(a: &Matrix2) -> Complex64 {
    a[0][0] + a[1][1]
}

/// A μ-Markoff map given by its values on the base triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuMarkoffMap {
    seed: [Complex64; 3],
    mu: Complex64,
    kernels: Kernels,
}

impl MuMarkoffMap {
    /// The map with `φ(0/1) = x`, `φ(1/1) = y`, `φ(1/0) = z`.
    pub fn from_triple(x: Complex64, y: Complex64, z: Complex64) -> Result<Self> {
        if [x, y, z].iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let mu = x * x + y * y + z * z - x * y * z;
        let kernels = Kernels::new(ModulusParams::new(mu)?);
        Ok(MuMarkoffMap {
            seed: [x, y, z],
            mu,
            kernels,
        })
    }

    /// The map with seed `(tr A, tr B, tr AB)`.
    pub fn from_generators(a: &Matrix2, b: &Matrix2) -> Result<Self> {
        for m in [a, b] {
            let d = det(m);
            if (d - 1.0).norm() > 1e-9 {
                return Err(Error::NotUnimodular(d));
            }
        }
        Self::from_triple(trace(a), trace(b), trace(&mat_mul(a, b)))
    }

    pub fn seed(&self) -> [Complex64; 3] {
        self.seed
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn kernels(&self) -> &Kernels {
        &self.kernels
    }

    pub fn params(&self) -> &ModulusParams {
        &self.kernels.params
    }

    /// `φ(r)`, walking down the tree and collapsing long turns into fan
    /// closed forms.
    pub fn eval(&self, r: FareyFraction) -> Complex64 {
        let [x, y, z] = self.seed;
        if r == FareyFraction::ZERO {
            return x;
        }
        if r == FareyFraction::ONE {
            return y;
        }
        if r == FareyFraction::INFINITY {
            return z;
        }
        let path = stern_brocot_path(r);
        // (left, right, mediant) values of the current triangle.
        let (mut l, mut rt, mut m) = if path.negative { (z, x, z * x - y) } else { (x, z, y) };
        for &(mv, k) in path.runs() {
            if k >= FAN_THRESHOLD {
                match mv {
                    Move::Left => {
                        let f = FanModel::from_values(l, rt, m);
                        (rt, m) = (f.value(k as i64), f.value(k as i64 + 1));
                    }
                    Move::Right => {
                        let f = FanModel::from_values(rt, l, m);
                        (l, m) = (f.value(k as i64), f.value(k as i64 + 1));
                    }
                }
            } else {
                for _ in 0..k {
                    match mv {
                        Move::Left => (rt, m) = (m, l * m - rt),
                        Move::Right => (l, m) = (m, m * rt - l),
                    }
                }
            }
        }
        m
    }

    /// `|x² + y² + z² − xyz − μ|` at the seed.
    pub fn vertex_residual(&self) -> f64 {
        let [x, y, z] = self.seed;
        (x * x + y * y + z * z - x * y * z - self.mu).norm()
    }

    /// The fan around `center`, indexed from its canonical neighbours.
    pub fn fan(&self, center: FareyFraction) -> FanModel {
        let (r0, r1) = fan_neighbors(center);
        let mut f = FanModel::from_values(self.eval(center), self.eval(r0), self.eval(r1));
        let v0 = (r0.p(), r0.q());
        let cv = (center.p(), center.q());
        let plus = FareyFraction::new(v0.0 + cv.0, v0.1 + cv.1).ok();
        let step = if plus == Some(r1) { cv } else { (-cv.0, -cv.1) };
        f.labels = Some(FanLabels {
            center,
            origin: v0,
            step,
        });
        f
    }
}

/// The neighbours `(r0, r1)` of `center` that start its fan.
pub fn fan_neighbors(center: FareyFraction) -> (FareyFraction, FareyFraction) {
    if center == FareyFraction::INFINITY {
        (FareyFraction::ZERO, FareyFraction::ONE)
    } else if center == FareyFraction::ZERO {
        (FareyFraction::INFINITY, FareyFraction::ONE)
    } else if center == FareyFraction::ONE {
        (FareyFraction::ZERO, FareyFraction::INFINITY)
    } else {
        stern_brocot_path(center).replay_pair()
    }
}

/// Shape of the neighbour sequence around a region with value `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FanKind {
    /// `x0 ∉ [−2, 2]`: `y_n = Aλⁿ + Bλ⁻ⁿ`, `|λ| ≠ 1`.
    Exponential,
    /// Real `x0 ∈ (−2, 2)`: `|λ| = 1`, values stay bounded.
    Elliptic,
    /// `x0 = 2`: `y_n = y_0 + n·s`.
    Linear,
    /// `x0 = −2`: `y_n = (−1)ⁿ(y_0 + n·s)`.
    AlternatingLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanLabels {
    pub center: FareyFraction,
    origin: (i64, i64),
    step: (i64, i64),
}

/// Closed form for the values `y_n` adjacent to a fixed region, satisfying
/// `y_{n+1} = x0·y_n − y_{n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanModel {
    pub kind: FanKind,
    pub x0: Complex64,
    pub lambda: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub degenerate_slope: Complex64,
    pub y0: Complex64,
    pub labels: Option<FanLabels>,
    theta: f64,
    log_lambda: Complex64,
}

impl FanModel {
    /// The fan with centre value `x0` and consecutive values `y0`, `y1`.
    pub fn from_values(x0: Complex64, y0: Complex64, y1: Complex64) -> Self {
        let zero = c(0.0, 0.0);
        let mut f = FanModel {
            kind: FanKind::Exponential,
            x0,
            lambda: c(1.0, 0.0),
            a: zero,
            b: zero,
            degenerate_slope: zero,
            y0,
            labels: None,
            theta: 0.0,
            log_lambda: zero,
        };
        if (x0 - 2.0).norm() <= 1e-12 {
            f.kind = FanKind::Linear;
            f.degenerate_slope = y1 - y0;
            return f;
        }
        if (x0 + 2.0).norm() <= 1e-12 {
            f.kind = FanKind::AlternatingLinear;
            f.lambda = c(-1.0, 0.0);
            f.degenerate_slope = -y1 - y0;
            return f;
        }
        let lambda = if x0.im == 0.0 && x0.re.abs() < 2.0 {
            f.kind = FanKind::Elliptic;
            f.theta = (x0.re / 2.0).acos();
            Complex64::from_polar(1.0, f.theta)
        } else {
            (x0 + csqrt_conv(x0 * x0 - 4.0)) / 2.0
        };
        let inv = 1.0 / lambda;
        f.lambda = lambda;
        f.log_lambda = lambda.ln();
        f.a = (y1 - y0 * inv) / (lambda - inv);
        f.b = y0 - f.a;
        f
    }

    /// `y_n` for any integer `n`.
    pub fn value(&self, n: i64) -> Complex64 {
        let nf = n as f64;
        match self.kind {
            FanKind::Linear => self.y0 + nf * self.degenerate_slope,
            FanKind::AlternatingLinear => {
                let v = self.y0 + nf * self.degenerate_slope;
                if n.rem_euclid(2) == 0 {
                    v
                } else {
                    -v
                }
            }
            FanKind::Elliptic => {
                self.a * Complex64::from_polar(1.0, nf * self.theta)
                    + self.b * Complex64::from_polar(1.0, -nf * self.theta)
            }
            FanKind::Exponential => {
                let p = (nf * self.log_lambda).exp();
                self.a * p + self.b / p
            }
        }
    }

    /// Region carrying `y_n`, when the fan was built from a map.
    pub fn region(&self, n: i64) -> Option<FareyFraction> {
        let l = self.labels?;
        FareyFraction::new(l.origin.0 + n * l.step.0, l.origin.1 + n * l.step.1).ok()
    }

    /// Growth factor per step in the increasing direction (1 when not exponential).
    pub fn rate(&self) -> f64 {
        match self.kind {
            FanKind::Exponential => {
                let r = self.lambda.norm();
                r.max(1.0 / r)
            }
            _ => 1.0,
        }
    }

    /// `(dominant, subdominant)` coefficient moduli for `n → +∞`.
    fn growth_coefficients(&self) -> (f64, f64) {
        if self.lambda.norm() >= 1.0 {
            (self.a.norm(), self.b.norm())
        } else {
            (self.b.norm(), self.a.norm())
        }
    }

    /// Lower bound on `|y_n|` for `n ≥ 0`, non-decreasing in `n`.
    pub fn modulus_lower_bound(&self, n: u64) -> f64 {
        let nf = n as f64;
        match self.kind {
            FanKind::Linear | FanKind::AlternatingLinear => self.degenerate_slope.norm() * nf - self.y0.norm(),
            FanKind::Elliptic => (self.a.norm() - self.b.norm()).abs(),
            FanKind::Exponential => {
                let (d, s) = self.growth_coefficients();
                let r = self.rate().powf(nf);
                d * r - s / r
            }
        }
    }

    /// Upper bound on `|y_n|` for `n ≥ 0`.
    pub fn modulus_upper_bound(&self, n: u64) -> f64 {
        let nf = n as f64;
        match self.kind {
            FanKind::Linear | FanKind::AlternatingLinear => self.y0.norm() + self.degenerate_slope.norm() * nf,
            FanKind::Elliptic => self.a.norm() + self.b.norm(),
            FanKind::Exponential => {
                let (d, s) = self.growth_coefficients();
                let r = self.rate().powf(nf);
                d * r + s / r
            }
        }
    }

    /// Smallest `n ≥ 1` (searching up to `limit`) after which every `y_n` has
    /// modulus above `threshold` and consecutive products reach `2|x0|`.
    pub fn escape_index(&self, threshold: f64, limit: u64) -> Option<u64> {
        let need = 2.0 * self.x0.norm();
        let ok = |n: u64| {
            let l = self.modulus_lower_bound(n);
            l > threshold && l * self.modulus_lower_bound(n + 1) >= need
        };
        match self.kind {
            FanKind::Elliptic => ok(1).then_some(1),
            FanKind::Linear | FanKind::AlternatingLinear => {
                let s = self.degenerate_slope.norm();
                if s == 0.0 {
                    return None;
                }
                let mut n = (((threshold + self.y0.norm()) / s).floor() as u64).max(1);
                while n <= limit {
                    if ok(n) {
                        return Some(n);
                    }
                    n += 1;
                }
                None
            }
            FanKind::Exponential => (1..=limit).find(|&n| ok(n)),
        }
    }
}

/// Orientation of an edge: the head is the completion of smaller `|φ|`.
pub fn arrow(m: &MuMarkoffMap, e: TreeEdge) -> DirectedEdge {
    let (p, d) = triangle_completions(e);
    let (vp, vd) = (m.eval(p).norm(), m.eval(d).norm());
    let head = if (vp - vd).abs() <= 1e-12 * vp.max(vd) {
        if level_order(&p, &d).is_le() {
            p
        } else {
            d
        }
    } else if vp < vd {
        p
    } else {
        d
    };
    DirectedEdge::new(e, head).expect("completion is a valid head")
}

/// Limits on tree searches; exceeding any is reported, never guessed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest Fibonacci level a search may visit.
    pub max_fib: u64,
    /// Total regions a search may visit.
    pub node_cap: u64,
    /// Terms a single fan summation may take.
    pub fan_cap: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_fib: 30,
            node_cap: 1_000_000,
            fan_cap: 10_000_000,
        }
    }
}

/// Regions found by a pruned search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaScan {
    /// Regions with `|φ| ≤ k`, in level order, with their values.
    pub regions: Vec<(FareyFraction, Complex64)>,
    /// True iff every unexplored branch was excluded by the growth prune.
    pub complete: bool,
    pub visited: u64,
    /// Set when the search stopped at a value in the open interval `(−2, 2)`.
    pub open_interval_witness: Option<(FareyFraction, Complex64)>,
}

impl OmegaScan {
    pub fn fractions(&self) -> Vec<FareyFraction> {
        self.regions.iter().map(|(r, _)| *r).collect()
    }
}

/// Whether a value lies in the real open interval `(−2, 2)`.
pub fn in_open_interval(v: Complex64) -> bool {
    v.im.abs() <= 1e-12 * v.norm().max(1.0) && v.re.abs() < 2.0 - 1e-12
}

#[derive(Clone, Copy)]
struct Node {
    a: (FareyFraction, Complex64),
    b: (FareyFraction, Complex64),
    head: (FareyFraction, Complex64),
}

struct Scanner {
    k: f64,
    budget: Budget,
    stop_on_open: bool,
    found: Vec<(FareyFraction, Complex64)>,
    complete: bool,
    stopped: bool,
    visited: u64,
    witness: Option<(FareyFraction, Complex64)>,
    stack: Vec<Node>,
}

impl Scanner {
    fn new(k: f64, budget: Budget, stop_on_open: bool) -> Self {
        Scanner {
            k,
            budget,
            stop_on_open,
            found: vec![],
            complete: true,
            stopped: false,
            visited: 0,
            witness: None,
            stack: vec![],
        }
    }

    /// Records a region; false means it lies beyond the budget.
    fn visit(&mut self, r: FareyFraction, v: Complex64) -> bool {
        if r.fib() > self.budget.max_fib || self.visited >= self.budget.node_cap {
            self.complete = false;
            if self.visited >= self.budget.node_cap {
                self.stopped = true;
            }
            return false;
        }
        self.visited += 1;
        if v.norm() <= self.k {
            self.found.push((r, v));
            if self.witness.is_none() && in_open_interval(v) {
                self.witness = Some((r, v));
                if self.stop_on_open {
                    self.stopped = true;
                }
            }
        }
        true
    }

    fn run(&mut self) {
        while let Some(n) = self.stack.pop() {
            if self.stopped {
                self.complete = false;
                return;
            }
            self.process(n);
        }
    }

    fn process(&mut self, n: Node) {
        let e = TreeEdge::new(n.a.0, n.b.0).expect("scan edges are neighbors");
        let w = other_completion(e, n.head.0).expect("head completes edge");
        let wv = n.a.1 * n.b.1 - n.head.1;
        let small_a = n.a.1.norm() <= PRUNE_MARGIN;
        let small_b = n.b.1.norm() <= PRUNE_MARGIN;
        if !small_a && !small_b {
            if wv.norm() >= n.head.1.norm() {
                return;
            }
            if self.visit(w, wv) {
                self.stack.push(Node {
                    a: n.a,
                    b: (w, wv),
                    head: n.b,
                });
                self.stack.push(Node {
                    a: (w, wv),
                    b: n.b,
                    head: n.a,
                });
            }
            return;
        }
        let (x, y) = if small_a { (n.a, n.b) } else { (n.b, n.a) };
        self.fan(x, y, n.head, (w, wv));
    }

    /// Explores `Ω⁻` of the edge `{x, y0}` (head `c`) along the fan of `x`.
    fn fan(
        &mut self,
        x: (FareyFraction, Complex64),
        y0: (FareyFraction, Complex64),
        c: (FareyFraction, Complex64),
        y1: (FareyFraction, Complex64),
    ) {
        let model = FanModel::from_values(x.1, y0.1, y1.1);
        let thr = self.k.max(PRUNE_MARGIN);
        let stop = model.escape_index(thr, self.budget.max_fib.max(1) * 4);
        let (mut prev, mut cur) = (c, y0);
        let mut n = 0u64;
        loop {
            let next_r = other_completion(TreeEdge::new(x.0, cur.0).expect("fan"), prev.0).expect("fan step");
            let next = if n == 0 { y1 } else { (next_r, x.1 * cur.1 - prev.1) };
            n += 1;
            // ε_{n−1} = ({Y_{n−1}, Y_n}, head X).
            let in_range = stop.is_none_or(|s| n < s);
            if in_range && !self.visit(next.0, next.1) {
                return;
            }
            self.stack.push(Node {
                a: cur,
                b: next,
                head: x,
            });
            if stop == Some(n) {
                return;
            }
            prev = cur;
            cur = next;
            if self.stopped {
                return;
            }
        }
    }

    fn finish(mut self) -> OmegaScan {
        self.found.sort_by(|a, b| level_order(&a.0, &b.0));
        self.found.dedup_by(|a, b| a.0 == b.0);
        OmegaScan {
            regions: self.found,
            complete: self.complete,
            visited: self.visited,
            open_interval_witness: self.witness,
        }
    }
}

fn root_nodes(m: &MuMarkoffMap) -> [Node; 3] {
    let [x, y, z] = m.seed();
    let (r0, r1, ri) = (FareyFraction::ZERO, FareyFraction::ONE, FareyFraction::INFINITY);
    [
        Node {
            a: (r0, x),
            b: (r1, y),
            head: (ri, z),
        },
        Node {
            a: (r1, y),
            b: (ri, z),
            head: (r0, x),
        },
        Node {
            a: (r0, x),
            b: (ri, z),
            head: (r1, y),
        },
    ]
}

pub(crate) fn omega_scan(m: &MuMarkoffMap, k: f64, budget: Budget, stop_on_open: bool) -> OmegaScan {
    let mut s = Scanner::new(k, budget, stop_on_open);
    let [x, y, z] = m.seed();
    for (r, v) in [
        (FareyFraction::ZERO, x),
        (FareyFraction::ONE, y),
        (FareyFraction::INFINITY, z),
    ] {
        s.visit(r, v);
    }
    for n in root_nodes(m).into_iter().rev() {
        s.stack.push(n);
    }
    s.run();
    s.finish()
}

/// All regions with `|φ| ≤ k`, found by a search pruned wherever both flanks
/// exceed `2` in modulus and values stop decreasing.
pub fn omega_leq(m: &MuMarkoffMap, k: f64, budget: Budget) -> OmegaScan {
    omega_scan(m, k, budget, false)
}

/// Regions with `|φ| ≤ k` in `Ω⁻(e)` only.
pub fn scan_branch(m: &MuMarkoffMap, e: DirectedEdge, k: f64, budget: Budget) -> OmegaScan {
    let mut s = Scanner::new(k, budget, false);
    let (a, b) = e.flanks();
    let h = e.head();
    s.stack.push(Node {
        a: (a, m.eval(a)),
        b: (b, m.eval(b)),
        head: (h, m.eval(h)),
    });
    s.run();
    s.finish()
}

/// Upper limit on edges added while growing the attracting subtree.
const SUBTREE_CAP: usize = 100_000;

/// The finite subtree toward which every edge outside it points, with its
/// circular set.
///
/// Starting from the base vertex, edges of the circular set are absorbed
/// while they point away, have both flanks of modulus at most 2, or hide a
/// region of modulus at most 2 behind them.
pub fn attracting_subtree(m: &MuMarkoffMap, budget: Budget) -> Result<(SubtreeSpec, Vec<DirectedEdge>)> {
    let scan = omega_leq(m, 2.0, budget);
    if !scan.complete {
        return Err(Error::Inconclusive(format!(
            "search for |phi| <= 2 did not finish within max_fib {} / node_cap {}",
            budget.max_fib, budget.node_cap
        )));
    }
    let small: BTreeSet<FareyFraction> = scan.fractions().into_iter().collect();
    let mut t = SubtreeSpec::vertex(Triangle::base());
    for _ in 0..SUBTREE_CAP {
        let cs = circular_set(&t)?;
        let bad = cs.iter().find(|e| {
            let (a, b) = e.flanks();
            arrow(m, e.edge()).head() != e.head()
                || (small.contains(&a) && small.contains(&b))
                || small.iter().any(|r| e.in_omega_minus(r))
        });
        match bad {
            None => return Ok((t, cs)),
            Some(e) => t.push_edge(e.edge())?,
        }
    }
    Err(Error::Inconclusive(format!(
        "attracting subtree exceeds {SUBTREE_CAP} edges"
    )))
}

/// Parameters of a map invariant under a parabolic fixing `1/0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantMapSpec {
    pub p: i64,
    pub q: i64,
    pub ratio_sign: i8,
    pub x0: Complex64,
    pub y0: Complex64,
    pub y1: Complex64,
    pub period: u64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

/// The map with `φ(1/0) = 2cos(qπ/p)`, `φ(0/1) = y0` and
/// `φ(1/1) = y0·e^{±iqπ/p}`, whose fan around `1/0` is periodic.
pub fn invariant_map(p: i64, q: i64, y0: Complex64, ratio_sign: i8) -> Result<(MuMarkoffMap, InvariantMapSpec)> {
    if p < 1 || q < 0 || q >= p {
        return Err(Error::InvalidInput(format!("need 0 <= q < p, got p = {p}, q = {q}")));
    }
    if ratio_sign != 1 && ratio_sign != -1 {
        return Err(Error::InvalidInput("ratio sign must be +1 or -1".into()));
    }
    if y0.norm() < 1e-12 {
        return Err(Error::InvalidInput("y0 must be nonzero".into()));
    }
    if q == 0 {
        return Err(Error::Reducible(c(4.0, 0.0)));
    }
    let ang = q as f64 * PI / p as f64;
    let x0 = c(if 2 * q == p { 0.0 } else { 2.0 * ang.cos() }, 0.0);
    let rho = c(snap(ang.cos()), snap(ratio_sign as f64 * ang.sin()));
    let y1 = y0 * rho;
    let m = MuMarkoffMap::from_triple(y0, y1, x0)?;
    let period = (2 * p / gcd(q, 2 * p)) as u64;
    let (mut a, mut b) = (y0, y1);
    for _ in 0..period {
        (a, b) = (b, x0 * b - a);
    }
    let scale = y0.norm();
    if (a - y0).norm() > 1e-9 * scale || (b - y1).norm() > 1e-9 * scale {
        return Err(Error::Precondition(format!("fan is not {period}-periodic")));
    }
    Ok((
        m,
        InvariantMapSpec {
            p,
            q,
            ratio_sign,
            x0,
            y0,
            y1,
            period,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: i64, q: i64) -> FareyFraction {
        FareyFraction::new(p, q).unwrap()
    }

    fn map(x: Complex64, y: Complex64, z: Complex64) -> MuMarkoffMap {
        MuMarkoffMap::from_triple(x, y, z).unwrap()
    }

    fn maskit() -> MuMarkoffMap {
        map(c(2.0, 0.0), c(2.0, -1.0), c(2.0, -3.0))
    }

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    #[test]
    fn triple_construction() {
        assert!(map(r(3.0), r(3.0), r(3.0)).mu().norm() < 1e-12);
        assert!((map(r(-2.0), r(-2.0), r(-2.0)).mu() - 20.0).norm() < 1e-12);
        assert!(map(r(0.0), r(2.0), c(0.0, 2.0)).mu().norm() < 1e-12);
        assert!(matches!(
            MuMarkoffMap::from_triple(r(2.0), r(2.0), r(2.0)),
            Err(Error::Reducible(_))
        ));
        assert_eq!(
            MuMarkoffMap::from_triple(r(f64::NAN), r(1.0), r(1.0)),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn generator_construction() {
        let one = r(1.0);
        let zero = r(0.0);
        let a = [[one, one], [zero, one]];
        let b = [[one, zero], [one, one]];
        let m = MuMarkoffMap::from_generators(&a, &b).unwrap();
        assert_eq!(m.seed(), [r(2.0), r(2.0), r(3.0)]);
        assert!((m.mu() - 5.0).norm() < 1e-12);
        let id = [[one, zero], [zero, one]];
        assert!(matches!(
            MuMarkoffMap::from_generators(&id, &id),
            Err(Error::Reducible(_))
        ));
        let bad = [[r(2.0), zero], [zero, one]];
        assert!(matches!(
            MuMarkoffMap::from_generators(&bad, &id),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn eval_examples() {
        let m = map(r(3.0), r(3.0), r(3.0));
        assert_eq!(m.eval(f(2, 1)), r(6.0));
        assert_eq!(m.eval(f(5, 2)), r(87.0));
        assert_eq!(m.eval(f(-1, 1)), r(6.0));
        let zeta = c(1.0, 2.0);
        let i = c(0.0, 1.0);
        let mk = maskit();
        assert!((mk.eval(f(1, 2)) - (-i * (zeta - 2.0))).norm() < 1e-12);
    }

    #[test]
    fn long_turns_match_recurrence() {
        let m = map(c(2.5, 0.3), c(-1.1, 2.0), c(0.7, -0.4));
        // 1/100: a run of 99 left turns around 0/1.
        let fan = m.fan(FareyFraction::ZERO);
        let (mut a, mut b) = (fan.y0, m.eval(fan.region(1).unwrap()));
        for _ in 1..100 {
            (a, b) = (b, m.seed()[0] * b - a);
        }
        assert_eq!(fan.region(100), Some(f(1, 100)));
        let v = m.eval(f(1, 100));
        assert!((v - b).norm() <= 1e-8 * b.norm(), "{v} vs {b}");
        let _ = a;
    }

    #[test]
    fn fan_examples() {
        let m = map(r(3.0), r(3.0), r(3.0));
        let fan = m.fan(FareyFraction::INFINITY);
        assert_eq!(fan.kind, FanKind::Exponential);
        for (n, want) in [(-1, 6.0), (0, 3.0), (1, 3.0), (2, 6.0), (3, 15.0), (4, 39.0)] {
            assert!((fan.value(n) - want).norm() < 1e-10, "n = {n}");
        }
        assert_eq!(fan.region(2), Some(f(2, 1)));
        assert_eq!(fan.region(-1), Some(f(-1, 1)));

        let mk = maskit().fan(FareyFraction::ZERO);
        assert_eq!(mk.kind, FanKind::Linear);
        assert!((mk.degenerate_slope.norm() - 2.0).abs() < 1e-12);
        assert!((mk.degenerate_slope * mk.degenerate_slope - (maskit().mu() - 4.0)).norm() < 1e-12);

        let e = Complex64::from_polar(1.0, 1.0);
        let m = map(r(6.0), 5.0 * e + 1.0 / e, r(2.0 * 1f64.cos()));
        let fan = m.fan(FareyFraction::INFINITY);
        assert_eq!(fan.kind, FanKind::Elliptic);
        assert!((fan.lambda - e).norm() < 1e-14);
        assert!((fan.a - 5.0).norm() < 1e-12 && (fan.b - 1.0).norm() < 1e-12);
        for n in -50..50 {
            let v = fan.value(n).norm();
            assert!((4.0 - 1e-12..=6.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn fan_product_invariant() {
        let m = map(c(3.1, 0.2), c(1.0, 1.0), c(-0.5, 2.0));
        let fan = m.fan(FareyFraction::INFINITY);
        let x0 = fan.x0;
        let want = (x0 * x0 - m.mu()) / (x0 * x0 - 4.0);
        assert!((fan.a * fan.b - want).norm() < 1e-10);
    }

    #[test]
    fn alternating_fan() {
        let fan = FanModel::from_values(r(-2.0), c(1.0, 1.0), c(0.5, -3.0));
        let (mut a, mut b) = (c(1.0, 1.0), c(0.5, -3.0));
        for n in 2..200 {
            (a, b) = (b, -2.0 * b - a);
            assert!((fan.value(n) - b).norm() < 1e-8 * b.norm().max(1.0));
        }
    }

    #[test]
    fn arrow_examples() {
        let m = map(r(3.0), r(3.0), r(3.0));
        let e = TreeEdge::new(FareyFraction::ZERO, FareyFraction::ONE).unwrap();
        assert_eq!(arrow(&m, e).head(), FareyFraction::INFINITY);
        // Equal moduli: the lower-level completion wins.
        let m = map(r(3.0), r(3.0), r(-3.0));
        let e = TreeEdge::new(FareyFraction::ZERO, FareyFraction::INFINITY).unwrap();
        assert_eq!(arrow(&m, e).head(), FareyFraction::ONE);
        let m = map(r(0.0), r(2.0), c(0.0, 2.0));
        let e = TreeEdge::new(FareyFraction::ZERO, FareyFraction::ONE).unwrap();
        assert_eq!(arrow(&m, e).head(), FareyFraction::INFINITY);
    }

    #[test]
    fn omega_examples() {
        let s = omega_leq(&map(r(3.0), r(3.0), r(3.0)), 2.0, Budget::default());
        assert!(s.complete && s.regions.is_empty());
        let s = omega_leq(&maskit(), 2.0, Budget::default());
        assert!(s.complete);
        assert_eq!(s.fractions(), vec![FareyFraction::ZERO]);
        let s = omega_leq(&map(r(1.0), r(1.0), r(1.0)), 2.0, Budget::default());
        let found = s.fractions();
        for b in [FareyFraction::ZERO, FareyFraction::ONE, FareyFraction::INFINITY] {
            assert!(found.contains(&b));
        }
    }

    #[test]
    fn thrice_punctured_sphere_scan() {
        let m = map(r(-2.0), r(-2.0), r(-2.0));
        let s = omega_leq(&m, 2.0, Budget::default());
        assert!(s.complete);
        assert_eq!(s.regions.len(), 3);
    }

    #[test]
    fn attracting_subtree_examples() {
        let (t, cs) = attracting_subtree(&map(r(3.0), r(3.0), r(3.0)), Budget::default()).unwrap();
        assert!(t.edges().is_empty());
        assert_eq!(cs.len(), 3);

        let (t, cs) = attracting_subtree(&maskit(), Budget::default()).unwrap();
        assert!(!t.edges().is_empty());
        for e in &cs {
            assert!(!e.in_omega_minus(&FareyFraction::ZERO));
        }

        let (t, cs) = attracting_subtree(&map(r(-2.0), r(-2.0), r(-2.0)), Budget::default()).unwrap();
        assert_eq!(t.edges().len(), 3);
        assert_eq!(cs.len(), 6);
    }

    #[test]
    fn invariant_map_examples() {
        let (m, spec) = invariant_map(2, 1, r(2.0), 1).unwrap();
        assert_eq!(m.seed(), [r(2.0), c(0.0, 2.0), r(0.0)]);
        assert_eq!(spec.period, 4);
        assert!(m.mu().norm() < 1e-12);
        let fan = m.fan(FareyFraction::INFINITY);
        for (n, want) in [(0, r(2.0)), (1, c(0.0, 2.0)), (2, r(-2.0)), (3, c(0.0, -2.0))] {
            assert!((fan.value(n) - want).norm() < 1e-12);
        }

        let (m, spec) = invariant_map(5, 1, r(3.0), 1).unwrap();
        let x0 = 2.0 * (PI / 5.0).cos();
        assert_eq!(spec.period, 10);
        assert!((m.mu() - x0 * x0).norm() < 1e-12);

        let (m, _) = invariant_map(2, 1, r(3.0), 1).unwrap();
        assert_eq!(m.seed(), [r(3.0), c(0.0, 3.0), r(0.0)]);

        assert!(matches!(invariant_map(3, 0, r(1.0), 1), Err(Error::Reducible(_))));
        assert!(invariant_map(3, 4, r(1.0), 1).is_err());
    }
}
