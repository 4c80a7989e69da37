//! Minimal dependency-free SVG rendering: axes, polylines, and heatmap
//! rectangles. Output is plain text with fixed two-decimal coordinates,
//! so plots are testable against golden files.

use kpp_core::pde_2d::Field2D;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 48.0;

const SERIES_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn axes(x_label: &str, y_label: &str) -> String {
    format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{ly}\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"14\" y=\"{cy}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 14 {cy})\">{y_label}</text>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        cx = W / 2.0,
        ly = H - 12.0,
        cy = H / 2.0,
    )
}

/// Line plot of one or more named series.
pub fn line_plot(series: &[(&str, &[(f64, f64)])], x_label: &str, y_label: &str) -> String {
    let mut svg = header();
    svg.push_str(&axes(x_label, y_label));
    let all = series.iter().flat_map(|(_, pts)| pts.iter());
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let path: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{color}\">{name}</text>\n",
            W - MARGIN - 120.0,
            MARGIN + 14.0 * (k as f64 + 1.0)
        ));
    }
    // Corner tick labels.
    svg.push_str(&format!(
        "<text x=\"{m}\" y=\"{by}\" font-size=\"10\">{x0:.3}</text>\n\
         <text x=\"{rx}\" y=\"{by}\" font-size=\"10\" text-anchor=\"end\">{x1:.3}</text>\n\
         <text x=\"{lx}\" y=\"{b}\" font-size=\"10\" text-anchor=\"end\">{y0:.3}</text>\n\
         <text x=\"{lx}\" y=\"{t}\" font-size=\"10\" text-anchor=\"end\">{y1:.3}</text>\n",
        m = MARGIN,
        by = H - MARGIN + 14.0,
        rx = W - MARGIN,
        lx = MARGIN - 4.0,
        b = H - MARGIN,
        t = MARGIN + 8.0,
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Three-stop blue/white/red map for values in [0, 1].
fn heat_color(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let (r, g, b) = if v < 0.5 {
        let s = v / 0.5;
        (
            (37.0 + s * (255.0 - 37.0)) as u8,
            (52.0 + s * (255.0 - 52.0)) as u8,
            (148.0 + s * (255.0 - 148.0)) as u8,
        )
    } else {
        let s = (v - 0.5) / 0.5;
        (255, (255.0 - s * (255.0 - 52.0)) as u8, (255.0 - s * (255.0 - 37.0)) as u8)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of a field, downsampled to at most `max_cells` per dimension.
pub fn heatmap(field: &Field2D, max_cells: usize) -> String {
    let mut svg = header();
    svg.push_str(&axes("x", "y"));
    let step_i = (field.nx / max_cells).max(1);
    let step_j = (field.ny / max_cells).max(1);
    let cols = field.nx.div_ceil(step_i);
    let rows = field.ny.div_ceil(step_j);
    let cw = (W - 2.0 * MARGIN) / cols as f64;
    let ch = (H - 2.0 * MARGIN) / rows as f64;
    for (jj, j) in (0..field.ny).step_by(step_j).enumerate() {
        for (ii, i) in (0..field.nx).step_by(step_i).enumerate() {
            let x = MARGIN + ii as f64 * cw;
            let y = H - MARGIN - (jj as f64 + 1.0) * ch;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                cw + 0.5,
                ch + 0.5,
                heat_color(field.at(i, j))
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
