//! Hand-written SVG box plots and skeleton-field heatmaps.

use std::fmt::Write;

use rdw_core::geom::PhysEnv;
use rdw_core::skeleton::SkeletonGrid;
use rdw_core::stats::Summary;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round tick step covering `span` in about five intervals.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// One box per method: quartile box, median bar, whiskers to min and max.
pub fn box_plot(title: &str, boxes: &[(String, Summary)]) -> String {
    let (w_box, left, right, top, bottom) = (90.0, 70.0, 20.0, 40.0, 50.0);
    let width = left + right + w_box * boxes.len().max(1) as f64;
    let height = 360.0;
    let plot_h = height - top - bottom;
    let lo = boxes.iter().map(|b| b.1.min).fold(f64::INFINITY, f64::min);
    let hi = boxes.iter().map(|b| b.1.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let step = tick_step((hi - lo).max(1.0));
    let y0 = (lo / step).floor() * step;
    let y1 = ((hi / step).ceil() * step).max(y0 + step);
    let y = |v: f64| top + plot_h * (1.0 - (v - y0) / (y1 - y0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" {FONT} font-weight=\"bold\">{}</text>",
        width / 2.0,
        esc(title)
    );
    let mut t = y0;
    while t <= y1 + 1e-9 {
        let yy = y(t);
        let _ = writeln!(
            s,
            "<line x1=\"{left}\" y1=\"{yy:.2}\" x2=\"{:.1}\" y2=\"{yy:.2}\" stroke=\"#ddd\"/>",
            width - right
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\" {FONT}>{}</text>",
            left - 6.0,
            yy + 4.0,
            t
        );
        t += step;
    }
    let _ = writeln!(
        s,
        "<text transform=\"translate(18 {:.1}) rotate(-90)\" text-anchor=\"middle\" {FONT}>common resets</text>",
        top + plot_h / 2.0
    );
    for (i, (name, b)) in boxes.iter().enumerate() {
        let cx = left + w_box * (i as f64 + 0.5);
        let half = w_box * 0.3;
        let _ = writeln!(s, "<g class=\"box\">");
        let _ = writeln!(
            s,
            "<line x1=\"{cx:.1}\" y1=\"{:.2}\" x2=\"{cx:.1}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y(b.max),
            y(b.q3)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{cx:.1}\" y1=\"{:.2}\" x2=\"{cx:.1}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y(b.q1),
            y(b.min)
        );
        for v in [b.min, b.max] {
            let _ = writeln!(
                s,
                "<line x1=\"{:.1}\" y1=\"{:.2}\" x2=\"{:.1}\" y2=\"{:.2}\" stroke=\"black\"/>",
                cx - half / 2.0,
                y(v),
                cx + half / 2.0,
                y(v)
            );
        }
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.2}\" width=\"{:.1}\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"black\"/>",
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{:.2}\" x2=\"{:.1}\" y2=\"{:.2}\" stroke=\"#c00\" stroke-width=\"2\"/>",
            cx - half,
            y(b.median),
            cx + half,
            y(b.median)
        );
        let _ = writeln!(
            s,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>{} (n={})</text>",
            height - bottom + 20.0,
            esc(name),
            b.n
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

/// Blue-to-yellow ramp for `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Index of the largest finite value, ties to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.is_finite() && best.map_or(true, |b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Colors every skeleton cell by `values` and outlines the room walls.
pub fn heatmap(title: &str, env: &PhysEnv, grid: &SkeletonGrid, values: &[f64]) -> String {
    let delta = grid.params().delta;
    let (nx, ny) = grid.grid_dims();
    let origin = grid.origin();
    let scale = (400.0 / (nx.max(ny) as f64 * delta)).max(1.0);
    let (margin, top, bar) = (20.0, 40.0, 70.0);
    let map_w = nx as f64 * delta * scale;
    let map_h = ny as f64 * delta * scale;
    let width = map_w + 2.0 * margin + bar;
    let height = map_h + top + margin;
    let px = |x: f64| margin + (x - origin.x) * scale;
    let py = |y: f64| top + map_h - (y - origin.y) * scale;
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = |v: f64| {
        if !v.is_finite() {
            1.0
        } else if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.5
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.1}\" height=\"{height:.1}\" viewBox=\"0 0 {width:.1} {height:.1}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" {FONT} font-weight=\"bold\">{}</text>",
        margin + map_w / 2.0,
        esc(title)
    );
    for (i, v) in values.iter().enumerate() {
        let [cx, cy] = grid.cell(i);
        let x = origin.x + cx as f64 * delta;
        let y = origin.y + (cy + 1) as f64 * delta;
        let _ = writeln!(
            s,
            "<rect class=\"cell\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>{:.3}</title></rect>",
            px(x),
            py(y),
            delta * scale,
            delta * scale,
            ramp(norm(*v)),
            v
        );
    }
    let ring = |pts: &[rdw_core::geom::Point2]| {
        pts.iter()
            .map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(
        s,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
        ring(env.boundary())
    );
    for o in env.obstacles() {
        let _ = writeln!(s, "<polygon points=\"{}\" fill=\"#555\" stroke=\"black\"/>", ring(o));
    }
    let bx = margin + map_w + 20.0;
    for k in 0..50 {
        let t = k as f64 / 49.0;
        let _ = writeln!(
            s,
            "<rect x=\"{bx:.1}\" y=\"{:.2}\" width=\"14\" height=\"{:.2}\" fill=\"{}\"/>",
            top + map_h * (1.0 - t) - map_h / 50.0,
            map_h / 50.0 + 0.5,
            ramp(t)
        );
    }
    for (v, yy) in [(hi, top + 10.0), (lo, top + map_h)] {
        if v.is_finite() {
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{yy:.1}\" {FONT}>{v:.2}</text>",
                bx + 18.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdw_core::skeleton::SkeletonParams;
    use rdw_core::stats::summary;

    #[test]
    fn box_count() {
        let boxes: Vec<_> = ["ours", "s2c", "s2o", "zigzag"]
            .iter()
            .enumerate()
            .map(|(i, m)| (m.to_string(), summary(&[i as f64, 2.0 * i as f64 + 5.0, 9.0]).unwrap()))
            .collect();
        let svg = box_plot("a <b>", &boxes);
        assert_eq!(svg.matches("<g class=\"box\">").count(), 4);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn ticks() {
        assert_eq!(tick_step(10.0), 2.0);
        assert_eq!(tick_step(47.0), 10.0);
        assert_eq!(tick_step(0.3), 0.1);
    }

    #[test]
    fn square_fields() {
        let env = PhysEnv::rectangle(5.0, 5.0, 0.2).unwrap();
        let grid = SkeletonGrid::build(&env, &SkeletonParams::default()).unwrap();
        let (nx, ny) = grid.grid_dims();
        let at = |i: usize, j: usize| (0..grid.len()).find(|&k| grid.cell(k) == [i, j]).unwrap();
        let l = grid.escapability_field();
        for i in 0..nx {
            for j in 0..ny {
                let v = l[at(i, j)];
                assert!((v - l[at(nx - 1 - i, j)]).abs() < 1e-9);
                assert!((v - l[at(i, ny - 1 - j)]).abs() < 1e-9);
            }
        }
        let central = [[4, 4], [4, 5], [5, 4], [5, 5]];
        let h_best = grid.cell(argmax(grid.safety_field()).unwrap());
        assert!(central.contains(&h_best), "{h_best:?}");
        // the longest single walk starts in a corner, along the diagonal
        let l_best = grid.cell(argmax(l).unwrap());
        assert!([0, nx - 1].contains(&l_best[0]) && [0, ny - 1].contains(&l_best[1]), "{l_best:?}");
        let svg = heatmap("L", &env, &grid, l);
        assert_eq!(svg.matches("class=\"cell\"").count(), grid.len());
    }
}
