//! CSV and SVG emission for sampled tables.
//!
//! CSV rows carry full shortest-round-trip decimal precision, so re-parsing
//! reproduces the table bit-exactly and reruns are byte-identical.

use crate::francoise::{MelnikovTable, TableRow};
use crate::{Error, Result};
use num_complex::Complex64;

/// `t,k,re,im,err_est` with one row per grid point.
pub fn table_to_csv(table: &MelnikovTable) -> String {
    let mut out = String::from("t,k,re,im,err_est\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.t, table.k, row.value.re, row.value.im, row.err_est
        ));
    }
    out
}

/// Parses the CSV produced by [`table_to_csv`].
pub fn table_from_csv(text: &str) -> Result<MelnikovTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Scenario("empty CSV".into()))?;
    if header.trim() != "t,k,re,im,err_est" {
        return Err(Error::Scenario(format!("unexpected CSV header `{header}`")));
    }
    let mut k = 0usize;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Scenario(format!("CSV line {}: expected 5 fields", i + 2)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Scenario(format!("CSV line {}: bad number `{s}`", i + 2)))
        };
        k = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Scenario(format!("CSV line {}: bad order", i + 2)))?;
        rows.push(TableRow {
            t: parse(parts[0])?,
            value: Complex64::new(parse(parts[2])?, parse(parts[3])?),
            err_est: parse(parts[4])?,
        });
    }
    Ok(MelnikovTable { k, rows, provenance: "csv".into() })
}

/// Minimal SVG line plot of `|M_k(t)|` against `t`.
pub fn table_to_svg(table: &MelnikovTable) -> String {
    let width = 640.0;
    let height = 400.0;
    let margin = 50.0;
    let xs: Vec<f64> = table.rows.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = table.rows.iter().map(|r| r.value.norm()).collect();
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let sx = |x: f64| margin + (x - x_min) / (x_max - x_min).max(1e-300) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y - y_min) / (y_max - y_min).max(1e-300) * (height - 2.0 * margin);
    let pts: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<line x1=\"{m}\" y1=\"{ybase}\" x2=\"{xend}\" y2=\"{ybase}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ybase}\" stroke=\"black\"/>\n",
            "<text x=\"{xmid}\" y=\"{h_label}\" text-anchor=\"middle\" font-size=\"13\">t</text>\n",
            "<text x=\"14\" y=\"{ymid}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 14 {ymid})\">|M_{k}(t)|</text>\n",
            "<text x=\"{m}\" y=\"{h_label}\" text-anchor=\"middle\" font-size=\"11\">{xmin:.3}</text>\n",
            "<text x=\"{xend}\" y=\"{h_label}\" text-anchor=\"middle\" font-size=\"11\">{xmax:.3}</text>\n",
            "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"{pts}\"/>\n",
            "</svg>\n"
        ),
        w = width,
        h = height,
        m = margin,
        ybase = height - margin,
        xend = width - margin,
        xmid = width / 2.0,
        ymid = height / 2.0,
        h_label = height - margin / 3.0,
        k = table.k,
        xmin = x_min,
        xmax = x_max,
        pts = pts.join(" ")
    )
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> MelnikovTable {
        MelnikovTable {
            k: 2,
            rows: vec![
                TableRow { t: 0.1, value: Complex64::new(-1.2566370614359172, 1e-17), err_est: 3e-12 },
                TableRow { t: 0.2, value: Complex64::new(-2.5132741228718345, 0.0), err_est: 2.5e-12 },
            ],
            provenance: "m2".into(),
        }
    }

    #[test]
    fn single_row_two_lines() {
        let mut t = sample_table();
        t.rows.truncate(1);
        let csv = table_to_csv(&t);
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        let t = sample_table();
        let csv = table_to_csv(&t);
        let back = table_from_csv(&csv).unwrap();
        assert_eq!(back.k, t.k);
        for (a, b) in t.rows.iter().zip(&back.rows) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
            assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
            assert_eq!(a.err_est.to_bits(), b.err_est.to_bits());
        }
        // and writing again is byte-identical
        assert_eq!(csv, table_to_csv(&back));
    }

    #[test]
    fn svg_is_wellformed_enough() {
        let svg = table_to_svg(&sample_table());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
