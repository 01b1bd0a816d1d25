//! Minimal self-contained SVG output: overlaid histograms and ladder line
//! plots. No external assets, scripts, or fonts beyond generic families.

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 56.0; // margins
const MR: f64 = 16.0;
const MT: f64 = 36.0;
const MB: f64 = 44.0;

fn finite_min_max(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn axes(x_lo: f64, x_hi: f64, y_hi: f64) -> String {
    let x0 = ML;
    let x1 = W - MR;
    let y0 = H - MB;
    let y1 = MT;
    format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"{x0}\" y=\"{ylab}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"middle\">{xlo:.4}</text>\n\
         <text x=\"{x1}\" y=\"{ylab}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"middle\">{xhi:.4}</text>\n\
         <text x=\"{xtext}\" y=\"{ytop}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"end\">{yhi:.4}</text>\n",
        ylab = y0 + 16.0,
        xlo = x_lo,
        xhi = x_hi,
        xtext = x0 - 4.0,
        ytop = y1 + 4.0,
        yhi = y_hi,
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Overlaid density histograms of one or more labelled series.
pub fn histogram(series: &[(&str, &[f64], &str)], n_bins: usize, title: &str) -> String {
    let all: Vec<f64> = series.iter().flat_map(|(_, v, _)| v.iter().copied()).collect();
    let (lo, hi) = finite_min_max(&all);
    let bin_w = (hi - lo) / n_bins as f64;
    let mut densities: Vec<Vec<f64>> = Vec::new();
    let mut y_max: f64 = 0.0;
    for (_, vals, _) in series {
        let mut counts = vec![0.0f64; n_bins];
        for &v in vals.iter().filter(|v| v.is_finite()) {
            let k = (((v - lo) / bin_w) as usize).min(n_bins - 1);
            counts[k] += 1.0;
        }
        let norm = vals.len() as f64 * bin_w;
        for c in &mut counts {
            *c /= norm;
            y_max = y_max.max(*c);
        }
        densities.push(counts);
    }
    if y_max == 0.0 {
        y_max = 1.0;
    }
    let mut out = header(title);
    out.push_str(&axes(lo, hi, y_max));
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    for ((label, _, color), counts) in series.iter().zip(&densities) {
        for (k, &d) in counts.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let x = ML + plot_w * k as f64 / n_bins as f64;
            let h = plot_h * d / y_max;
            out.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" \
                 fill=\"{color}\" fill-opacity=\"0.45\"/>\n",
                H - MB - h,
                plot_w / n_bins as f64,
            ));
        }
        let _ = label;
    }
    // Legend.
    for (i, (label, _, color)) in series.iter().enumerate() {
        let y = MT + 16.0 * (i as f64 + 1.0);
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\" \
             fill-opacity=\"0.45\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            W - MR - 150.0,
            y - 10.0,
            W - MR - 132.0,
            y,
            escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Ladder line plot with markers; both axes linear in the given coordinates
/// (pre-transform to logs at the call site when needed).
pub fn line_plot(points: &[(f64, f64)], title: &str) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (x_lo, x_hi) = finite_min_max(&xs);
    let (y_lo, y_hi) = finite_min_max(&ys);
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    let px = |x: f64| ML + plot_w * (x - x_lo) / (x_hi - x_lo);
    let py = |y: f64| H - MB - plot_h * (y - y_lo) / (y_hi - y_lo);
    let mut out = header(title);
    out.push_str(&axes(x_lo, x_hi, y_hi));
    let path: Vec<String> =
        points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    ));
    for &(x, y) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n",
            px(x),
            py(y)
        ));
    }
    out.push_str("</svg>\n");
    out
}
