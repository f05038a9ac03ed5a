//! Result files: CSV rows, JSON region samples and SVG plots.

use std::fmt::Write as _;

use mur_core::{ErrorMeasure, RegionSample};

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["sample_index".to_string(), "measure".to_string()];
    cols.extend((1..=n).map(|i| format!("w_{i}")));
    cols.push("b".into());
    cols.extend((1..=n).map(|i| format!("eps_{i}")));
    cols.push("gap".into());
    cols.push("status".into());
    cols.join(",")
}

/// Header plus one row per boundary point; indices count within each sample.
pub fn region_csv(samples: &[RegionSample]) -> String {
    let n = samples.iter().flat_map(|s| s.points.first()).map(|p| p.w.len()).next().unwrap_or(0);
    let mut out = csv_header(n);
    out.push('\n');
    for s in samples {
        for (k, p) in s.points.iter().enumerate() {
            let mut row = vec![k.to_string(), p.measure.tag().to_string()];
            row.extend(p.w.as_slice().iter().map(|&v| fmt_g12(v)));
            row.push(fmt_g12(p.b));
            row.extend(p.epsilon.iter().map(|&v| fmt_g12(v)));
            row.push(fmt_g12(p.gap));
            row.push(p.status.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn region_json(samples: &[RegionSample]) -> String {
    let mut s = if samples.len() == 1 {
        serde_json::to_string_pretty(&samples[0])
    } else {
        serde_json::to_string_pretty(samples)
    }
    .expect("region samples serialize");
    s.push('\n');
    s
}

const PANEL: f64 = 360.0;
const MARGIN: f64 = 56.0;

fn color(m: ErrorMeasure) -> &'static str {
    match m {
        ErrorMeasure::Max => "#c0392b",
        ErrorMeasure::Calibration => "#2471a3",
        ErrorMeasure::Entangled => "#1e8449",
    }
}

/// Tradeoff plot: the boundary curve for two observables, pairwise
/// projections of the boundary points otherwise. Failed points are skipped.
pub fn region_svg(samples: &[RegionSample]) -> Option<String> {
    let n = samples.iter().flat_map(|s| s.points.first()).map(|p| p.w.len()).next()?;
    if n < 2 {
        return None;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let cell = PANEL + 2.0 * MARGIN;
    let (width, height) = (cell * pairs.len() as f64, cell + 24.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let extent = samples
            .iter()
            .flat_map(|s| [s.caps[i], s.caps[j]].into_iter().chain(s.points.iter().flat_map(|p| [p.epsilon[i], p.epsilon[j]])))
            .filter(|v| v.is_finite())
            .fold(0.0f64, f64::max);
        let scale = if extent > 0.0 { PANEL / (1.05 * extent) } else { 1.0 };
        let x0 = k as f64 * cell + MARGIN;
        let y0 = MARGIN + PANEL;
        let px = |v: f64| x0 + v * scale;
        let py = |v: f64| y0 - v * scale;
        panel_axes(&mut out, x0, y0, extent * 1.05, i, j);
        for s in samples {
            let c = color(s.measure);
            let _ = writeln!(
                out,
                r#"<path d="M{:.2} {:.2}V{:.2}M{:.2} {:.2}H{:.2}" stroke="{c}" stroke-dasharray="4 3" fill="none"/>"#,
                px(s.caps[i]),
                y0,
                y0 - PANEL,
                x0,
                py(s.caps[j]),
                x0 + PANEL
            );
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|p| p.epsilon[i].is_finite() && p.epsilon[j].is_finite())
                .map(|p| (px(p.epsilon[i]), py(p.epsilon[j])))
                .collect();
            if n == 2 && pts.len() > 1 {
                let d: Vec<String> = pts.iter().enumerate().map(|(m, (x, y))| format!("{}{x:.2} {y:.2}", if m == 0 { 'M' } else { 'L' })).collect();
                let _ = writeln!(out, r#"<path d="{}" stroke="{c}" stroke-width="1.5" fill="none"/>"#, d.join(""));
            }
            for (x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{c}"/>"#);
            }
        }
    }
    for (k, s) in samples.iter().enumerate() {
        let x = MARGIN + 90.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{:.0}" width="10" height="10" fill="{}"/><text x="{:.0}" y="{:.0}">{}</text>"#,
            height - 20.0,
            color(s.measure),
            x + 14.0,
            height - 11.0,
            s.measure.tag()
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn panel_axes(out: &mut String, x0: f64, y0: f64, range: f64, i: usize, j: usize) {
    let _ = writeln!(out, r#"<path d="M{x0} {}V{y0}H{}" stroke="black" fill="none"/>"#, y0 - PANEL, x0 + PANEL);
    for t in 0..=5 {
        let v = range * t as f64 / 5.0;
        let off = PANEL * t as f64 / 5.0;
        let label = format!("{v:.3}");
        let _ = writeln!(
            out,
            r#"<path d="M{:.2} {y0}v5M{x0} {:.2}h-5" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            x0 + off,
            y0 - off,
            x0 + off,
            y0 + 18.0,
            x0 - 8.0,
            y0 - off + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">ε{}</text><text transform="translate({:.2} {:.2}) rotate(-90)" text-anchor="middle">ε{}</text>"#,
        x0 + PANEL / 2.0,
        y0 + 38.0,
        i + 1,
        x0 - 44.0,
        y0 - PANEL / 2.0,
        j + 1
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        let cases = [
            (0.4, "0.4"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (1.5e-9, "1.5e-09"),
            (0.0, "0"),
            (99999999999.99999, "100000000000"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g12(x), s, "{x:e}");
        }
    }

    #[test]
    fn header_lists_all_columns() {
        assert_eq!(csv_header(2), "sample_index,measure,w_1,w_2,b,eps_1,eps_2,gap,status");
    }
}
