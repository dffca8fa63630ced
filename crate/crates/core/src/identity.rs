//! Identity engines: edge weights, branch sums with certified tail bounds,
//! full McShane sums, BQ classification, parabolic quotient sums and the
//! asymptotic averages for an elliptic base region.

use crate::error::{Error, Result};
use crate::farey::{circular_set, DirectedEdge, FareyFraction, SubtreeSpec, TreeEdge, Triangle};
use crate::functions::{c, CylinderValue, Kernels};
use crate::markoff::{
    attracting_subtree, in_open_interval, omega_leq, omega_scan, scan_branch, Budget, FanKind, FanModel,
    InvariantMapSpec, MuMarkoffMap,
};
use crate::summation::ComplexSum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Entries with a flank below this modulus are summed along that flank's fan.
const SMALL_FLANK: f64 = 2.25;
/// Smallest flank modulus for which the subtree bound holds.
const BOUND_FLANK: f64 = 2.1667;
/// Required ratio of the tail value to the larger flank for the subtree bound.
const BOUND_GROWTH: f64 = 1.5;
/// Nesting limit for fans inside branches inside fans.
const MAX_DEPTH: u32 = 16;
/// Tolerance used by the local identity checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Outcome of summing a series against its target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub value: CylinderValue,
    pub target: CylinderValue,
    pub residual: f64,
    pub levels_used: u64,
    pub tail_bound: f64,
    pub regions_summed: u64,
    pub converged: bool,
}

/// Sum of `ℏ` over `Ω⁻` of one branch, with a bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tail {
    value: Complex64,
    bound: f64,
    terms: u64,
    levels: u64,
    converged: bool,
}

impl Tail {
    fn absorb(&mut self, other: &Tail) {
        self.value += other.value;
        self.bound += other.bound;
        self.terms += other.terms;
        self.levels = self.levels.max(other.levels);
        self.converged &= other.converged;
    }
}

/// Bound on `Σ |ℏ|` over `Ω⁻` of the branch with flanks `x`, `y` and head
/// `c`, when the flanks are large and the tail already grows.
fn subtree_bound(k: &Kernels, x: Complex64, y: Complex64, c: Complex64) -> Option<f64> {
    let (ax, ay) = (x.norm(), y.norm());
    let m = ax.min(ay);
    if m < BOUND_FLANK {
        return None;
    }
    let w = (x * y - c).norm();
    if w < BOUND_GROWTH * ax.max(ay) {
        return None;
    }
    let g = m - 2.0 / 3.0;
    let f = 1.0 / (1.0 - 2.0 / (g * g));
    Some(k.kernel_bound(w)? * f / (w * w))
}

#[derive(Clone, Copy)]
struct Entry {
    x: Complex64,
    y: Complex64,
    c: Complex64,
    lx: u64,
    ly: u64,
}

/// `Σ_{Ω⁻} ℏ` for the branch with flanks `x`, `y` and head value `c`.
///
/// Regions are taken in order of local Fibonacci level. Entries next to a
/// small flank are handed to the fan summation of that flank.
fn tail_sum(
    k: &Kernels,
    x: Complex64,
    y: Complex64,
    c: Complex64,
    tol: f64,
    budget: &Budget,
    depth: u32,
) -> Result<Tail> {
    if depth > MAX_DEPTH {
        return Err(Error::Inconclusive(format!("fan nesting deeper than {MAX_DEPTH}")));
    }
    if x.norm() < SMALL_FLANK {
        return fan_tail(k, x, y, c, tol, budget, depth);
    }
    if y.norm() < SMALL_FLANK {
        return fan_tail(k, y, x, c, tol, budget, depth);
    }
    let mut out = Tail {
        value: c0(),
        bound: 0.0,
        terms: 0,
        levels: 0,
        converged: true,
    };
    let mut total = ComplexSum::new();
    let mut buckets: BTreeMap<u64, Vec<Entry>> = BTreeMap::new();
    buckets.insert(2, vec![Entry { x, y, c, lx: 1, ly: 1 }]);
    let mut recent = [f64::INFINITY; 3];
    let mut delegated = 0u64;
    while let Some((level, entries)) = buckets.pop_first() {
        if level > budget.max_fib || out.terms > budget.node_cap {
            buckets.insert(level, entries);
            out.converged = false;
            out.bound += frontier_bound(k, &buckets);
            break;
        }
        let mut level_sum = ComplexSum::new();
        for e in entries {
            if e.x.norm() < SMALL_FLANK || e.y.norm() < SMALL_FLANK {
                delegated += 1;
                let sub_tol = tol / (8.0 * (delegated * delegated) as f64);
                let sub = tail_sum(k, e.x, e.y, e.c, sub_tol, budget, depth + 1)?;
                level_sum.add(sub.value);
                out.bound += sub.bound;
                out.terms += sub.terms;
                out.converged &= sub.converged;
                continue;
            }
            let w = e.x * e.y - e.c;
            level_sum.add(k.hbar(w)?);
            out.terms += 1;
            let lw = e.lx + e.ly;
            buckets.entry(e.lx + lw).or_default().push(Entry {
                x: e.x,
                y: w,
                c: e.y,
                lx: e.lx,
                ly: lw,
            });
            buckets.entry(lw + e.ly).or_default().push(Entry {
                x: w,
                y: e.y,
                c: e.x,
                lx: lw,
                ly: e.ly,
            });
        }
        let ls = level_sum.value();
        total.add(ls);
        out.levels += 1;
        recent = [recent[1], recent[2], ls.norm()];
        if out.levels >= 3 && recent.iter().all(|v| *v < tol / 10.0) {
            let fb = frontier_bound(k, &buckets);
            if fb < tol / 4.0 {
                out.bound += fb;
                break;
            }
        }
    }
    out.value = total.value();
    Ok(out)
}

fn frontier_bound(k: &Kernels, buckets: &BTreeMap<u64, Vec<Entry>>) -> f64 {
    let mut s = 0.0;
    for e in buckets.values().flatten() {
        match subtree_bound(k, e.x, e.y, e.c) {
            Some(b) => s += b,
            None => return f64::INFINITY,
        }
    }
    s
}

fn c0() -> Complex64 {
    c(0.0, 0.0)
}

/// Certified data for the fan beyond index `n`: the radius `l1` below which
/// no later fan value falls, the kernel constant there, the subtree factor,
/// and `Σ_{m>n} 1/|y_m|²` bounded from the lower bounds of `model`.
struct FanRemainder {
    l1: f64,
    kernel: f64,
    factor: f64,
    inv_sq_tail: f64,
}

impl FanRemainder {
    fn at(k: &Kernels, model: &FanModel, n: u64) -> Option<Self> {
        let l1 = model.modulus_lower_bound(n + 1);
        if l1 < BOUND_FLANK {
            return None;
        }
        let x0 = model.x0.norm();
        let l2 = model.modulus_lower_bound(n + 2);
        if l1 * l1 < 2.0 * x0 || l1 * l2 - x0 < BOUND_GROWTH * model.modulus_upper_bound(n + 2) {
            return None;
        }
        let kernel = k.kernel_bound(l1)?;
        let inv_sq_tail = match model.kind {
            FanKind::Linear | FanKind::AlternatingLinear => {
                let s = model.degenerate_slope.norm();
                let gap = linear_gap(model, n)?;
                1.0 / (s * s * gap)
            }
            FanKind::Exponential => {
                let r = model.rate();
                1.0 / (l1 * l1 * (1.0 - 1.0 / (r * r)))
            }
            FanKind::Elliptic => return None,
        };
        let g = l1 - 2.0 / 3.0;
        Some(FanRemainder {
            l1,
            kernel,
            factor: 1.0 / (1.0 - 2.0 / (g * g)),
            inv_sq_tail,
        })
    }

    /// Bound on `Σ_{m>n} Σ_{Ω⁻(ε_m)} |ℏ|`.
    fn branches(&self) -> f64 {
        self.kernel * self.inv_sq_tail * 4.0 * self.factor / (self.l1 * self.l1)
    }

    /// Bound on `Σ_{m>n} [|ℏ(y_m)| + Σ_{Ω⁻(ε_m)} |ℏ|]`.
    fn total(&self) -> f64 {
        self.kernel * self.inv_sq_tail + self.branches()
    }
}

/// `n − |y0|/|s|` for an arithmetic fan, when positive.
fn linear_gap(model: &FanModel, n: u64) -> Option<f64> {
    let gap = n as f64 - model.y0.norm() / model.degenerate_slope.norm();
    (gap > 0.0).then_some(gap)
}

/// Estimate of `Σ_{m>n} ℏ(y_m)` for an arithmetic fan `y_m = ±(y0 + m·s)`
/// from the leading term `a/y²`, with a bound on its error that also covers
/// the branches between later fan values.
///
/// `Σ_{m>n} 1/(y0 + ms)² = s⁻² Σ_{j≥0} (z + j)⁻²` with `z = n + 1 + y0/s`,
/// estimated by `1/z + 1/(2z²)` with first-order Euler–Maclaurin error at
/// most `1/(2 (Re z)²)`.
fn linear_remainder(k: &Kernels, model: &FanModel, n: u64) -> Option<(Complex64, f64)> {
    let rem = FanRemainder::at(k, model, n)?;
    let (a, kk) = k.expansion_bound(rem.l1)?;
    let s = model.degenerate_slope;
    let z = (n + 1) as f64 + model.y0 / s;
    if z.re <= 0.0 {
        return None;
    }
    let s2 = s * s;
    let est = a / s2 * (1.0 / z + 1.0 / (2.0 * z * z));
    let sn = s.norm();
    let gap = linear_gap(model, n)?;
    let err = a.norm() / (sn * sn * 2.0 * z.re * z.re) + kk / (3.0 * sn.powi(4) * gap.powi(3)) + rem.branches();
    Some((est, err))
}

/// `Σ_{Ω⁻} ℏ` for the branch with small flank `x0`, other flank `y0` and
/// head `c`, taken along the fan of `x0`: the fan values `y_n` plus the
/// branches between consecutive fan values.
fn fan_tail(
    k: &Kernels,
    x0: Complex64,
    y0: Complex64,
    c: Complex64,
    tol: f64,
    budget: &Budget,
    depth: u32,
) -> Result<Tail> {
    let y1 = x0 * y0 - c;
    let model = FanModel::from_values(x0, y0, y1);
    let mut out = Tail {
        value: c0(),
        bound: 0.0,
        terms: 0,
        levels: 1,
        converged: true,
    };
    let stuck = match model.kind {
        FanKind::Elliptic => true,
        FanKind::Linear | FanKind::AlternatingLinear => model.degenerate_slope.norm() == 0.0,
        FanKind::Exponential => model.rate() <= 1.0,
    };
    if stuck {
        out.converged = false;
        out.bound = f64::INFINITY;
        return Ok(out);
    }
    let closed = model.kind != FanKind::Exponential;
    let mut total = ComplexSum::new();
    let (mut prev, mut cur) = (y0, y1);
    let mut n = 1u64;
    loop {
        total.add(k.hbar(cur)?);
        out.terms += 1;
        // ε_{n−1}: flanks y_{n−1}, y_n, head x0.
        let eps_tol = tol / (8.0 * (n * n) as f64);
        match subtree_bound(k, prev, cur, x0) {
            Some(b) if b < eps_tol => out.bound += b,
            _ => {
                let sub = tail_sum(k, prev, cur, x0, eps_tol, budget, depth + 1)?;
                total.add(sub.value);
                out.bound += sub.bound;
                out.terms += sub.terms;
                out.levels = out.levels.max(sub.levels + 1);
                out.converged &= sub.converged;
            }
        }
        if closed {
            if let Some((est, err)) = linear_remainder(k, &model, n) {
                if err < tol / 4.0 {
                    total.add(est);
                    out.bound += err;
                    break;
                }
            }
        }
        let rest = FanRemainder::at(k, &model, n).map_or(f64::INFINITY, |r| r.total());
        if rest < tol / 4.0 {
            out.bound += rest;
            break;
        }
        if n >= budget.fan_cap {
            out.converged = false;
            out.bound += rest;
            break;
        }
        n += 1;
        let next = if closed { model.value(n as i64) } else { x0 * cur - prev };
        prev = cur;
        cur = next;
    }
    out.value = total.value();
    Ok(out)
}

/// `ψ(ē) = Ψ(x, y, z)` with `z` the head value (`z/(xy)` when `μ = 0`).
pub fn psi_edge(m: &MuMarkoffMap, e: DirectedEdge) -> Result<Complex64> {
    let (a, b) = e.flanks();
    m.kernels().psi(m.eval(a), m.eval(b), m.eval(e.head()))
}

fn compare(k: &Kernels, value: Complex64, target: Complex64) -> (CylinderValue, CylinderValue, f64) {
    (k.canonical(value), k.canonical(target), k.distance(value, target))
}

/// `Σ_{Ω⁰} ĥ + Σ_{Ω⁻} ℏ` against `ψ(ē)`.
///
/// The branch may be flanked by one region of value `±2`; any other region of
/// modulus at most 2 in the flanks or behind the edge is refused.
pub fn branch_sum(m: &MuMarkoffMap, e: DirectedEdge, tol: f64, budget: Budget) -> Result<SumReport> {
    check_tol(tol)?;
    let k = m.kernels();
    let (a, b) = e.flanks();
    let (x, y, z) = (m.eval(a), m.eval(b), m.eval(e.head()));
    let scan = scan_branch(m, e, 2.0, budget);
    if let Some((r, v)) = scan.regions.first() {
        return Err(Error::Decomposition(format!("region {r} behind {e} has value {v}")));
    }
    if !scan.complete {
        return Err(Error::Inconclusive(format!("search behind {e} did not finish")));
    }
    let small: Vec<Complex64> = [x, y].into_iter().filter(|v| v.norm() <= 2.0 + 1e-9).collect();
    let parabolic = |v: &Complex64| (v - 2.0).norm() <= 1e-9 || (v + 2.0).norm() <= 1e-9;
    if small.len() == 2 || small.iter().any(|v| !parabolic(v)) {
        return Err(Error::Decomposition(format!("flanks of {e} have values {x}, {y}")));
    }
    let target = k.psi(x, y, z)?;
    let t = tail_sum(k, x, y, z, tol / 2.0, &budget, 0)?;
    let value = k.hhat(x)? + k.hhat(y)? + t.value;
    let (value, target, residual) = compare(k, value, target);
    Ok(SumReport {
        value,
        target,
        residual,
        levels_used: t.levels,
        tail_bound: t.bound,
        regions_summed: t.terms + 2,
        converged: t.converged && residual <= tol + t.bound,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")))
    }
}

/// Outcome of the BQ scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    BQ,
    ExtendedBQ,
    ViolatesOpenInterval,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BQReport {
    pub classification: Classification,
    pub witnesses: Vec<(FareyFraction, Complex64)>,
    pub omega2: Vec<(FareyFraction, Complex64)>,
    pub complete: bool,
}

fn in_closed_interval(v: Complex64) -> bool {
    v.im.abs() <= 1e-12 * v.norm().max(1.0) && v.re.abs() <= 2.0 + 1e-12
}

/// Scans `|φ| ≤ 2` and classifies the map.
pub fn bq_classify(m: &MuMarkoffMap, budget: Budget) -> BQReport {
    let scan = omega_scan(m, 2.0, budget, true);
    let (classification, witnesses) = if let Some(w) = scan.open_interval_witness {
        (Classification::ViolatesOpenInterval, vec![w])
    } else if !scan.complete {
        (Classification::Inconclusive, vec![])
    } else {
        let closed: Vec<_> = scan
            .regions
            .iter()
            .copied()
            .filter(|(_, v)| in_closed_interval(*v))
            .collect();
        if closed.is_empty() {
            (Classification::BQ, vec![])
        } else {
            (Classification::ExtendedBQ, closed)
        }
    };
    BQReport {
        classification,
        witnesses,
        omega2: scan.regions,
        complete: scan.complete,
    }
}

/// `Σ_Ω ℏ(φ(X))` against `ν` (or `Σ_Ω h(φ(X))` against `½` when `μ = 0`),
/// split over the circular set of the attracting subtree.
pub fn mcshane_sum(m: &MuMarkoffMap, tol: f64, budget: Budget) -> Result<SumReport> {
    check_tol(tol)?;
    let bq = bq_classify(m, budget);
    match bq.classification {
        Classification::ViolatesOpenInterval => {
            return Err(Error::Inapplicable {
                reason: "a region has value in (-2, 2)".into(),
                witness: bq.witnesses.first().copied(),
            })
        }
        Classification::Inconclusive => return Err(Error::Inconclusive("search for |phi| <= 2 did not finish".into())),
        _ => {}
    }
    let (_, cs) = attracting_subtree(m, budget)?;
    let k = m.kernels();
    let branch_tol = tol / cs.len() as f64;
    let tails: Vec<Result<Tail>> = cs
        .par_iter()
        .map(|e| {
            let (a, b) = e.flanks();
            tail_sum(k, m.eval(a), m.eval(b), m.eval(e.head()), branch_tol, &budget, 0)
        })
        .collect();
    let flanks: BTreeSet<FareyFraction> = cs.iter().flat_map(|e| [e.flanks().0, e.flanks().1]).collect();
    let mut total = ComplexSum::new();
    let mut acc = Tail {
        value: c0(),
        bound: 0.0,
        terms: 0,
        levels: 0,
        converged: true,
    };
    for t in tails {
        let t = t?;
        total.add(t.value);
        acc.absorb(&t);
    }
    for r in &flanks {
        total.add(k.hbar(m.eval(*r))?);
    }
    let engine = total.value();
    let regions = acc.terms + flanks.len() as u64;
    let (value, target, residual, bound) = if k.is_zero_mu() {
        let v = engine / 2.0;
        let t = c(0.5, 0.0);
        (
            CylinderValue::raw(v),
            CylinderValue::raw(t),
            k.distance(v, t),
            acc.bound / 2.0,
        )
    } else {
        let (v, t, r) = compare(k, engine, k.nu());
        (v, t, r, acc.bound)
    };
    Ok(SumReport {
        value,
        target,
        residual,
        levels_used: acc.levels,
        tail_bound: bound,
        regions_summed: regions,
        converged: acc.converged && residual <= tol + bound,
    })
}

/// Values `y_0 … y_n` of the fan around `1/0` of an invariant map.
fn period_values(spec: &InvariantMapSpec, n: u64) -> Vec<Complex64> {
    let mut v = vec![spec.y0, spec.y1];
    while (v.len() as u64) <= n {
        let l = v.len();
        v.push(spec.x0 * v[l - 1] - v[l - 2]);
    }
    v.truncate(n as usize + 1);
    v
}

fn check_spec(spec: &InvariantMapSpec, m: &MuMarkoffMap) -> Result<()> {
    let [x, y, z] = m.seed();
    let scale = spec.y0.norm().max(1.0);
    if (x - spec.y0).norm() > 1e-12 * scale || (y - spec.y1).norm() > 1e-12 * scale || (z - spec.x0).norm() > 1e-12 {
        return Err(Error::Precondition(
            "map does not match the invariant-map parameters".into(),
        ));
    }
    Ok(())
}

/// `Σ_{Ω/⟨H⟩ − [1/0]} ℏ` against `0`, over one period of fan classes
/// `[j/1]` and the branches between consecutive ones.
pub fn quotient_sum(spec: &InvariantMapSpec, m: &MuMarkoffMap, tol: f64, budget: Budget) -> Result<SumReport> {
    check_tol(tol)?;
    check_spec(spec, m)?;
    let k = m.kernels();
    let ys = period_values(spec, spec.period);
    let edges: Vec<DirectedEdge> = (1..=spec.period as i64)
        .map(|j| {
            let e = TreeEdge::new(FareyFraction::integer(j - 1), FareyFraction::integer(j))?;
            DirectedEdge::new(e, FareyFraction::INFINITY)
        })
        .collect::<Result<_>>()?;
    let mut incomplete = false;
    for (j, e) in edges.iter().enumerate() {
        let yj = ys[j + 1];
        if in_open_interval(yj) {
            return Err(Error::Inapplicable {
                reason: "a fan class has value in (-2, 2)".into(),
                witness: Some((FareyFraction::integer(j as i64 + 1), yj)),
            });
        }
        let scan = scan_branch(m, *e, 2.0, budget);
        if let Some(w) = scan.open_interval_witness {
            return Err(Error::Inapplicable {
                reason: "a class has value in (-2, 2)".into(),
                witness: Some(w),
            });
        }
        incomplete |= !scan.complete;
    }
    if incomplete {
        return Err(Error::Inconclusive(
            "search over class representatives did not finish".into(),
        ));
    }
    let branch_tol = tol / (2.0 * spec.period as f64);
    let tails: Vec<Result<Tail>> = (1..=spec.period as usize)
        .into_par_iter()
        .map(|j| tail_sum(k, ys[j - 1], ys[j], spec.x0, branch_tol, &budget, 0))
        .collect();
    let mut total = ComplexSum::new();
    let mut acc = Tail {
        value: c0(),
        bound: 0.0,
        terms: 0,
        levels: 0,
        converged: true,
    };
    for (j, t) in tails.into_iter().enumerate() {
        let t = t?;
        total.add(k.hbar(ys[j + 1])?);
        total.add(t.value);
        acc.absorb(&t);
    }
    let engine = total.value();
    let (value, target, residual, bound) = if k.is_zero_mu() {
        let v = engine / 2.0;
        (
            CylinderValue::raw(v),
            CylinderValue::raw(c0()),
            k.distance(v, c0()),
            acc.bound / 2.0,
        )
    } else {
        let (v, t, r) = compare(k, engine, c0());
        (v, t, r, acc.bound)
    };
    Ok(SumReport {
        value,
        target,
        residual,
        levels_used: acc.levels,
        tail_bound: bound,
        regions_summed: acc.terms + spec.period,
        converged: acc.converged && residual <= tol + bound,
    })
}

/// `Σ_{k=1}^{2p} ψ(ε̄_k)` over consecutive fan edges around `1/0`, each
/// directed toward `1/0`; requires `φ(1/0)² = μ`.
pub fn psi_fan_period_sum(spec: &InvariantMapSpec, m: &MuMarkoffMap) -> Result<CylinderValue> {
    check_spec(spec, m)?;
    if (spec.x0 * spec.x0 - m.mu()).norm() > 1e-9 {
        return Err(Error::Precondition("the value at 1/0 squared must equal mu".into()));
    }
    let k = m.kernels();
    let n = 2 * spec.p as u64;
    let ys = period_values(spec, n);
    if let Some(y) = ys.iter().find(|y| y.norm() < 1e-12) {
        return Err(Error::Singular {
            what: "fan value",
            value: *y,
        });
    }
    let mut total = ComplexSum::new();
    for w in ys.windows(2) {
        total.add(k.psi(w[0], w[1], spec.x0)?);
    }
    Ok(k.canonical(total.value()))
}

/// One point of the running averages `S_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPoint {
    pub n: u64,
    pub sum: CylinderValue,
    pub re_over_n: f64,
    /// Distance of `S_N` from `0` (modulo `2πi` unless `μ = 0`).
    pub residue: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Angle `θ ∈ (0, π)` with `φ(1/0) = 2cos θ`, after checking that `1/0` is
/// the only region with `|φ| ≤ 2` and that its value is in `(−2, 2)`.
fn elliptic_angle(m: &MuMarkoffMap, budget: Budget) -> Result<f64> {
    let z = m.seed()[2];
    if !in_open_interval(z) {
        return Err(Error::Inapplicable {
            reason: "the value at 1/0 is not in (-2, 2)".into(),
            witness: Some((FareyFraction::INFINITY, z)),
        });
    }
    let scan = omega_leq(m, 2.0, budget);
    if let Some((r, v)) = scan.regions.iter().find(|(r, _)| *r != FareyFraction::INFINITY) {
        return Err(Error::Inapplicable {
            reason: "a region other than 1/0 has modulus at most 2".into(),
            witness: Some((*r, *v)),
        });
    }
    if !scan.complete {
        return Err(Error::Inconclusive("search for |phi| <= 2 did not finish".into()));
    }
    Ok((z.re / 2.0).acos())
}

/// `θ/π` within `1e−9` of a fraction with denominator at most 1000.
fn rational_angle(theta: f64) -> Option<(i64, i64)> {
    let t = theta / PI;
    (1..=1000i64).find_map(|q| {
        let p = (t * q as f64).round();
        ((t - p / q as f64).abs() <= 1e-9).then_some((p as i64, q))
    })
}

/// Per-interval terms `ℏ(x_n) + Σ_{Ω⁻(ε_n)} ℏ` for `n = 1..=n_max`, where
/// `x_n = φ(n/1)` and `ε_n = {(n−1)/1, n/1}` is directed toward `1/0`.
fn interval_terms(m: &MuMarkoffMap, n_max: u64, tol: f64, budget: Budget) -> Result<Vec<Tail>> {
    let k = m.kernels();
    let z = m.seed()[2];
    let fan = m.fan(FareyFraction::INFINITY);
    let term_tol = tol / (2.0 * n_max as f64);
    (1..=n_max as i64)
        .into_par_iter()
        .map(|n| {
            let (a, b) = (fan.value(n - 1), fan.value(n));
            let mut t = tail_sum(k, a, b, z, term_tol, &budget, 0)?;
            t.value += k.hbar(b)?;
            t.terms += 1;
            Ok(t)
        })
        .collect()
}

fn prefix_points(m: &MuMarkoffMap, terms: &[Tail], ns: &[u64]) -> Vec<AsymptoticPoint> {
    let k = m.kernels();
    let wanted: BTreeSet<u64> = ns.iter().copied().collect();
    let mut total = ComplexSum::new();
    let mut bound = 0.0;
    let mut ok = true;
    let mut out = BTreeMap::new();
    for (i, t) in terms.iter().enumerate() {
        total.add(t.value);
        bound += t.bound;
        ok &= t.converged;
        let n = i as u64 + 1;
        if wanted.contains(&n) {
            let mut v = total.value();
            let mut b = bound;
            if k.is_zero_mu() {
                v /= 2.0;
                b /= 2.0;
            }
            out.insert(
                n,
                AsymptoticPoint {
                    n,
                    sum: k.canonical(v),
                    re_over_n: v.re / n as f64,
                    residue: k.distance(v, c0()),
                    tail_bound: b,
                    converged: ok,
                },
            );
        }
    }
    ns.iter().filter_map(|n| out.get(n).copied()).collect()
}

/// `S_N = Σ_{r ∈ ℚ∩(0, N]} ℏ(φ(r))` for each `N`, for a map whose only
/// region of modulus at most 2 is `1/0` with value in `(−2, 2)`.
///
/// The caller asserts that `φ(1/0)` is not `2cos` of a rational multiple of
/// `π`; that cannot be decided in floating point.
pub fn asymptotic_scan(m: &MuMarkoffMap, ns: &[u64], tol: f64, budget: Budget) -> Result<Vec<AsymptoticPoint>> {
    check_tol(tol)?;
    if ns.contains(&0) {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    elliptic_angle(m, budget)?;
    let Some(&n_max) = ns.iter().max() else {
        return Ok(vec![]);
    };
    let terms = interval_terms(m, n_max, tol, budget)?;
    Ok(prefix_points(m, &terms, ns))
}

/// Denominators of the continued-fraction convergents of `x`, ascending,
/// skipping repeats and the leading 1.
pub fn convergent_denominators(x: f64, count: usize) -> Vec<u64> {
    let mut out = vec![];
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut r = x.fract();
    let mut guard = 0;
    while out.len() < count && guard < 64 {
        guard += 1;
        if r.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / r;
        let a = inv.floor() as u64;
        r = inv - a as f64;
        let next = match a.checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        (q_prev, q) = (q, next);
        if q > 1 && out.last() != Some(&q) {
            out.push(q);
        }
    }
    out
}

/// Partial sums along `N_k`, the convergent denominators of `θ/2π` where
/// `φ(1/0) = 2cos θ`, keeping only even ones when `φ(1/0)² = μ`.
///
/// Fails when `θ/π` is within `1e−9` of a fraction with denominator at most
/// 1000.
pub fn asymptotic_subsequence(
    m: &MuMarkoffMap,
    k_max: usize,
    tol: f64,
    budget: Budget,
) -> Result<Vec<AsymptoticPoint>> {
    check_tol(tol)?;
    let theta = elliptic_angle(m, budget)?;
    if let Some((p, q)) = rational_angle(theta) {
        return Err(Error::Inapplicable {
            reason: format!("the angle at 1/0 is {p}/{q} of pi"),
            witness: Some((FareyFraction::INFINITY, m.seed()[2])),
        });
    }
    let z = m.seed()[2];
    let even_only = (z * z - m.mu()).norm() <= 1e-9;
    let ns: Vec<u64> = convergent_denominators(theta / (2.0 * PI), k_max)
        .into_iter()
        .filter(|n| !even_only || n % 2 == 0)
        .collect();
    asymptotic_scan(m, &ns, tol, budget)
}

/// A local identity evaluated at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub ok: bool,
    pub value: CylinderValue,
    pub target: CylinderValue,
    pub residual: f64,
}

fn check(k: &Kernels, value: Complex64) -> CheckResult {
    let (value, target, residual) = compare(k, value, k.nu());
    CheckResult {
        ok: residual <= CHECK_TOL,
        value,
        target,
        residual,
    }
}

/// `ψ(ē) + ψ(−ē)` against `ν` (against 1 when `μ = 0`).
pub fn psi_reciprocity(m: &MuMarkoffMap, e: DirectedEdge) -> Result<CheckResult> {
    Ok(check(m.kernels(), psi_edge(m, e)? + psi_edge(m, e.reverse())?))
}

/// `Σ_{C(T)} ψ` against `ν` (against 1 when `μ = 0`).
pub fn circular_sum(m: &MuMarkoffMap, t: &SubtreeSpec) -> Result<CheckResult> {
    let mut total = ComplexSum::new();
    for e in circular_set(t)? {
        total.add(psi_edge(m, e)?);
    }
    Ok(check(m.kernels(), total.value()))
}

/// `Ψ(x,y,z) + Ψ(y,z,x) + Ψ(z,x,y)` at a vertex against `ν`.
pub fn triple_psi(m: &MuMarkoffMap, vertex: Triangle) -> Result<CheckResult> {
    let k = m.kernels();
    let [a, b, cc] = vertex.regions().map(|r| m.eval(r));
    let v = k.psi(a, b, cc)? + k.psi(b, cc, a)? + k.psi(cc, a, b)?;
    Ok(check(k, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::residue_distance;
    use crate::markoff::{attracting_subtree, invariant_map};

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    fn map(x: Complex64, y: Complex64, z: Complex64) -> MuMarkoffMap {
        MuMarkoffMap::from_triple(x, y, z).unwrap()
    }

    fn edge(a: FareyFraction, b: FareyFraction, head: FareyFraction) -> DirectedEdge {
        DirectedEdge::new(TreeEdge::new(a, b).unwrap(), head).unwrap()
    }

    fn maskit() -> MuMarkoffMap {
        map(r(2.0), c(2.0, -1.0), c(2.0, -3.0))
    }

    const Z: FareyFraction = FareyFraction::ZERO;
    const O: FareyFraction = FareyFraction::ONE;
    const INF: FareyFraction = FareyFraction::INFINITY;

    #[test]
    fn psi_edge_examples() {
        let m = map(r(3.0), r(3.0), r(3.0));
        let half = FareyFraction::new(1, 2).unwrap();
        assert!((psi_edge(&m, edge(Z, O, half)).unwrap() - 2.0 / 3.0).norm() < 1e-15);
        assert!((psi_edge(&m, edge(Z, O, INF)).unwrap() - 1.0 / 3.0).norm() < 1e-15);
        let m = map(r(-2.0), r(-2.0), r(-2.0));
        let v = psi_edge(&m, edge(Z, O, INF)).unwrap();
        assert!((v.re - 0.96242).abs() < 1e-5 && (v.im - PI).abs() < 1e-12);
    }

    #[test]
    fn branch_sum_regular() {
        let m = map(r(3.0), r(3.0), r(3.0));
        let b = Budget {
            max_fib: 60,
            ..Budget::default()
        };
        for e in [
            edge(Z, O, INF),
            edge(Z, O, FareyFraction::new(1, 2).unwrap()),
            edge(O, INF, Z),
        ] {
            let rep = branch_sum(&m, e, 1e-10, b).unwrap();
            assert!(rep.converged && rep.residual <= 1e-9, "{e}: {rep:?}");
        }
    }

    #[test]
    fn branch_sum_next_to_parabolic_region() {
        let m = maskit();
        let (_, cs) = attracting_subtree(&m, Budget::default()).unwrap();
        let mut seen = 0;
        for e in cs.iter().filter(|e| e.edge().contains(&Z)) {
            let rep = branch_sum(&m, *e, 1e-6, Budget::default()).unwrap();
            assert!(rep.converged && rep.residual <= 1e-5, "{e}: {rep:?}");
            seen += 1;
        }
        assert!(seen > 0);
    }

    #[test]
    fn branch_sum_refuses_small_interior() {
        let m = map(r(1.0), r(1.0), r(1.0));
        let e = edge(Z, O, INF);
        assert!(matches!(
            branch_sum(&m, e, 1e-6, Budget::default()),
            Err(Error::Decomposition(_))
        ));
    }

    #[test]
    fn mcshane_examples() {
        let b = Budget {
            max_fib: 60,
            ..Budget::default()
        };
        let rep = mcshane_sum(&map(r(3.0), r(3.0), r(3.0)), 1e-8, b).unwrap();
        assert!(rep.converged && (rep.value.re - 0.5).abs() <= 1e-8);
        let rep = mcshane_sum(&maskit(), 1e-5, b).unwrap();
        assert!(rep.converged && rep.residual <= 1e-5);
        let m = map(r(-2.0), r(-2.0), r(-2.0));
        let rep = mcshane_sum(&m, 1e-5, b).unwrap();
        let nu = c((9.0 + 80f64.sqrt()).ln(), PI);
        assert!(rep.converged && residue_distance(rep.value.to_complex(), nu) <= 1e-5);
        assert!(matches!(
            mcshane_sum(&map(r(1.0), r(1.0), r(1.0)), 1e-6, b),
            Err(Error::Inapplicable { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let rep = bq_classify(&map(r(3.0), r(3.0), r(3.0)), Budget::default());
        assert_eq!(rep.classification, Classification::BQ);
        assert!(rep.omega2.is_empty());
        let rep = bq_classify(&maskit(), Budget::default());
        assert_eq!(rep.classification, Classification::ExtendedBQ);
        assert_eq!(rep.omega2, vec![(Z, r(2.0))]);
        let rep = bq_classify(&map(r(1.0), r(1.0), r(1.0)), Budget::default());
        assert_eq!(rep.classification, Classification::ViolatesOpenInterval);
        assert_eq!(rep.witnesses[0].1, r(1.0));
    }

    #[test]
    fn quotient_examples() {
        for (p, q, y0) in [(2, 1, r(2.0)), (2, 1, r(3.0)), (5, 1, r(3.0))] {
            let (m, spec) = invariant_map(p, q, y0, 1).unwrap();
            let rep = quotient_sum(&spec, &m, 1e-6, Budget::default()).unwrap();
            assert!(rep.converged && rep.residual <= 1e-6, "{p} {q} {y0}: {rep:?}");
        }
        let (m, spec) = invariant_map(5, 1, r(1.5), 1).unwrap();
        assert!(matches!(
            quotient_sum(&spec, &m, 1e-6, Budget::default()),
            Err(Error::Inapplicable { .. })
        ));
    }

    #[test]
    fn period_sums_vanish() {
        for (p, y0, sign) in [(5, r(3.0), 1), (2, r(2.0), 1), (5, r(3.0), -1), (7, c(2.0, 1.0), -1)] {
            let (m, spec) = invariant_map(p, 1, y0, sign).unwrap();
            let v = psi_fan_period_sum(&spec, &m).unwrap();
            assert!(m.kernels().distance(v.to_complex(), c0()) <= 1e-9, "{p} {sign}: {v:?}");
        }
    }

    #[test]
    fn local_identity_checks() {
        let m = map(r(3.0), r(3.0), r(3.0));
        let rec = psi_reciprocity(&m, edge(Z, O, INF)).unwrap();
        assert!(rec.ok && rec.residual == 0.0);
        let m = map(r(-2.0), r(-2.0), r(-2.0));
        let t = triple_psi(&m, Triangle::base()).unwrap();
        assert!(t.ok, "{t:?}");
        let sub = SubtreeSpec::from_edges([TreeEdge::new(Z, O).unwrap()]).unwrap();
        assert!(circular_sum(&maskit(), &sub).unwrap().ok);
    }

    #[test]
    fn convergents_of_inverse_two_pi() {
        assert_eq!(
            convergent_denominators(1.0 / (2.0 * PI), 7),
            vec![6, 19, 25, 44, 333, 710, 103993]
        );
    }

    #[test]
    fn rational_angles_are_refused() {
        let (m, _) = invariant_map(3, 1, r(5.0), 1).unwrap();
        assert!(matches!(
            asymptotic_subsequence(&m, 4, 1e-6, Budget::default()),
            Err(Error::Inapplicable { .. })
        ));
        assert!(matches!(
            asymptotic_scan(&maskit(), &[10], 1e-6, Budget::default()),
            Err(Error::Inapplicable { .. })
        ));
    }
}
