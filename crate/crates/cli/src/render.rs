use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::Context;
use keynet_core::analysis::RegressionFit;

/// Left-aligned columns separated by two spaces; no trailing whitespace.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, cell) in cells.enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            write!(s, "{cell:<width$}", width = widths[i]).unwrap();
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut headers.iter().copied());
    line(&mut widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str));
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

/// `x` rounded to `digits` significant digits in positional notation; integer digits are never dropped.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.99.. -> 10.0..
    let shown = s.trim_start_matches('-').chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if shown > digits && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// Scatter of `points` with the fitted line, in a fixed 800x600 viewport.
pub fn regression_svg(points: &[(f64, f64)], fit: &RegressionFit) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 30.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 70.0;

    let x_max = points.iter().map(|p| p.0).fold(1.0, f64::max).ceil();
    let y_max = points.iter().map(|p| p.1).chain([fit.predict(x_max)]).fold(1.0, f64::max).ceil();
    let sx = |x: f64| LEFT + x / x_max * (W - LEFT - RIGHT);
    let sy = |y: f64| H - BOTTOM - y / y_max * (H - TOP - BOTTOM);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#).unwrap();
    writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/></g>"#,
        l = LEFT,
        r = W - RIGHT,
        b = H - BOTTOM,
        t = TOP
    )
    .unwrap();

    let x_step = tick_step(x_max);
    let y_step = tick_step(y_max);
    s.push_str(r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    s.push('\n');
    for i in 0..=(x_max / x_step) as usize {
        let x = i as f64 * x_step;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(x), H - BOTTOM + 18.0, x)
            .unwrap();
    }
    for i in 0..=(y_max / y_step) as usize {
        let y = i as f64 * y_step;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, sy(y) + 4.0, y).unwrap();
    }
    s.push_str("</g>\n");
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="16" text-anchor="middle">N</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 25.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="25" y="{y:.2}" font-family="sans-serif" font-size="16" text-anchor="middle" transform="rotate(-90 25 {y:.2})">SBEP(N)</text>"#,
        y = (TOP + H - BOTTOM) / 2.0
    )
    .unwrap();

    let x0 = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="2"/>"#,
        sx(x0),
        sy(fit.predict(x0)),
        sx(x_max),
        sy(fit.predict(x_max))
    )
    .unwrap();
    for &(x, y) in points {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(x), sy(y)).unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">y = {}x + {}, R^2 = {}</text>"#,
        LEFT + 20.0,
        TOP + 20.0,
        significant(fit.slope, 6),
        significant(fit.intercept, 6),
        significant(fit.r_squared, 6)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

fn tick_step(max: f64) -> f64 {
    [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0].into_iter().find(|&s| max / s <= 10.0).unwrap_or(max / 10.0)
}

/// Writes `contents` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot create a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
