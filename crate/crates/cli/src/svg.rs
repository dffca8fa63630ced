//! Upper half plane picture of the Farey tessellation, colored by the map.
//!
//! Region `r` owns the ideal triangle spanned by `r` and the two Farey
//! parents it is the mediant of; `1/1` owns the base triangle `(0, 1, ∞)`.
//! Fill runs linearly in RGB from `rgb(49,54,149)` at `log⁺|φ| = 0` to
//! `rgb(255,255,204)` at `log⁺|φ| ≥ cap`.

use markoff_core::farey::{regions_at_level, stern_brocot_path, Arc};
use markoff_core::markoff::MuMarkoffMap;
use markoff_core::FareyFraction;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LOW: [f64; 3] = [49.0, 54.0, 149.0];
const HIGH: [f64; 3] = [255.0, 255.0, 204.0];

pub struct Picture {
    pub svg: String,
    pub regions: u64,
}

fn color(m: &MuMarkoffMap, r: FareyFraction, cap: f64) -> String {
    let t = m.eval(r).norm().ln().max(0.0).min(cap) / cap;
    let ch: Vec<String> = (0..3)
        .map(|i| format!("{}", (LOW[i] + t * (HIGH[i] - LOW[i])).round() as u8))
        .collect();
    format!("rgb({})", ch.join(","))
}

struct Frame {
    lo: f64,
    scale: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        (t - self.lo) * self.scale
    }

    /// Closed path of the ideal triangle on the given vertices.
    fn triangle(&self, vs: [FareyFraction; 3]) -> String {
        let mut finite: Vec<f64> = vs.iter().filter(|v| !v.is_infinite()).map(|v| v.to_f64()).collect();
        finite.sort_by(f64::total_cmp);
        let r = |a: f64, b: f64| (b - a) * self.scale / 2.0;
        if let [s, t] = finite[..] {
            let (xs, xt) = (self.x(s), self.x(t));
            format!(
                "M{xs:.3},0L{xs:.3},{HEIGHT:.3}A{0:.3},{0:.3} 0 0 1 {xt:.3},{HEIGHT:.3}L{xt:.3},0Z",
                r(s, t)
            )
        } else {
            let [u, m, v] = [finite[0], finite[1], finite[2]];
            let (xu, xm, xv) = (self.x(u), self.x(m), self.x(v));
            format!(
                "M{xu:.3},{HEIGHT:.3}A{0:.3},{0:.3} 0 0 1 {xm:.3},{HEIGHT:.3}A{1:.3},{1:.3} 0 0 1 {xv:.3},{HEIGHT:.3}A{2:.3},{2:.3} 0 0 0 {xu:.3},{HEIGHT:.3}Z",
                r(u, m),
                r(m, v),
                r(u, v)
            )
        }
    }
}

/// Draws every region with Fibonacci level at most `depth` strictly inside
/// `window`, plus the base triangle.
pub fn render(m: &MuMarkoffMap, depth: u64, window: (FareyFraction, FareyFraction), cap: f64) -> Picture {
    let frame = Frame {
        lo: window.0.to_f64(),
        scale: WIDTH / (window.1.to_f64() - window.0.to_f64()),
    };
    let mut body = String::new();
    let mut path = |r: FareyFraction, vs: [FareyFraction; 3]| {
        writeln!(
            body,
            "<path data-region=\"{r}\" fill=\"{}\" d=\"{}\"/>",
            color(m, r, cap),
            frame.triangle(vs)
        )
        .unwrap();
    };
    path(
        FareyFraction::ONE,
        [FareyFraction::ZERO, FareyFraction::ONE, FareyFraction::INFINITY],
    );
    let mut regions = 1;
    let base = [FareyFraction::ZERO, FareyFraction::ONE, FareyFraction::INFINITY];
    for n in 1..=depth {
        for r in regions_at_level(n, Arc::new(window.0, window.1)) {
            if base.contains(&r) {
                continue;
            }
            let (a, b) = stern_brocot_path(r).replay_pair();
            path(r, [a, r, b]);
            regions += 1;
        }
    }
    let s = m.seed();
    let mut svg = String::new();
    writeln!(svg, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "<desc>seed {} {} {}; depth {depth}; window {},{}; cap {cap}</desc>",
        s[0], s[1], s[2], window.0, window.1
    )
    .unwrap();
    writeln!(svg, "<g stroke=\"#222222\" stroke-width=\"0.5\">").unwrap();
    svg += &body;
    writeln!(svg, "</g>\n</svg>").unwrap();
    Picture { svg, regions }
}
