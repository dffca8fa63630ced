//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use markoff_core::farey::{FareyFraction, TreeEdge};
use markoff_core::markoff::MuMarkoffMap;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(
        r.gen_range(lo..hi),
        r.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
}

/// A random map whose seed values have modulus in `[lo, hi)`.
pub fn random_map(r: &mut impl Rng, lo: f64, hi: f64) -> MuMarkoffMap {
    loop {
        let s = [
            random_complex(r, lo, hi),
            random_complex(r, lo, hi),
            random_complex(r, lo, hi),
        ];
        if let Ok(m) = MuMarkoffMap::from_triple(s[0], s[1], s[2]) {
            if (m.mu() - 4.0).norm() > 1e-3 {
                return m;
            }
        }
    }
}

/// Values on every region with `fib <= max_fib`, by repeated use of
/// `w = xy − z` outward from the base triangle.
pub fn brute_force_values(seed: [Complex64; 3], max_fib: u64) -> BTreeMap<FareyFraction, Complex64> {
    let f = |p, q| FareyFraction::new(p, q).unwrap();
    let (z0, o, inf) = (f(0, 1), f(1, 1), f(1, 0));
    let mut out = BTreeMap::new();
    out.insert(z0, seed[0]);
    out.insert(o, seed[1]);
    out.insert(inf, seed[2]);
    // (flank, flank, head) triples whose tails are still unknown.
    let mut stack = vec![(z0, o, inf), (o, inf, z0), (z0, inf, o)];
    while let Some((a, b, h)) = stack.pop() {
        // The tail completes {a, b} on the side away from h.
        let cands = [(a.p() + b.p(), a.q() + b.q()), (a.p() - b.p(), a.q() - b.q())];
        let w = cands
            .iter()
            .map(|&(p, q)| FareyFraction::new(p, q).unwrap())
            .find(|w| *w != h)
            .unwrap();
        if w.fib() > max_fib {
            continue;
        }
        let v = out[&a] * out[&b] - out[&h];
        out.insert(w, v);
        stack.push((a, w, b));
        stack.push((w, b, a));
    }
    out
}

pub fn edge(a: FareyFraction, b: FareyFraction) -> TreeEdge {
    TreeEdge::new(a, b).unwrap()
}
