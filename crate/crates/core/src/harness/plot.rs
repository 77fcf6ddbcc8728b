//! Self-contained SVG chart of mode shares with confidence bands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePoint {
    pub scenario: String,
    pub period: u32,
    pub indicator: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn read_aggregate<R: Read>(input: R) -> Result<Vec<AggregatePoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::data(format!("aggregate header: {e}")))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(format!("aggregate file is missing column `{name}`")))
    };
    let cols = ["scenario", "period", "indicator", "mean", "ci_low", "ci_high"].map(col);
    let [cs, cp, ci, cm, cl, ch] = match cols {
        [Ok(a), Ok(b), Ok(c), Ok(d), Ok(e), Ok(f)] => [a, b, c, d, e, f],
        other => return Err(other.into_iter().find_map(|r| r.err()).expect("one column missing")),
    };
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::data(format!("aggregate row {}: {e}", line + 1)))?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::data(format!("aggregate row {}: column {} is not numeric", line + 1, &headers[c])))
        };
        out.push(AggregatePoint {
            scenario: rec.get(cs).unwrap_or("").to_string(),
            period: num(cp)? as u32,
            indicator: rec.get(ci).unwrap_or("").to_string(),
            mean: num(cm)?,
            ci_low: num(cl)?,
            ci_high: num(ch)?,
        });
    }
    Ok(out)
}

/// Legend label, indicator and colour, in legend order.
const SERIES: [(&str, &str, &str); 3] =
    [("mot", "share_moto", "#d95f02"), ("car", "share_car", "#1b9e77"), ("pub", "share_pub", "#7570b3")];

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub title: Option<String>,
    /// Scenario to draw; the first one found when `None`.
    pub scenario: Option<String>,
}

/// Line chart of the three share indicators with shaded 95% bands, y fixed to [0, 1].
pub fn plot_shares(points: &[AggregatePoint], spec: &PlotSpec) -> Result<String> {
    let scenario = match &spec.scenario {
        Some(s) => s.clone(),
        None => points
            .iter()
            .find(|p| p.indicator.starts_with("share_"))
            .map(|p| p.scenario.clone())
            .ok_or_else(|| Error::data("aggregate data has no share rows to plot"))?,
    };
    let mut series: Vec<BTreeMap<u32, (f64, f64, f64)>> = vec![BTreeMap::new(); 3];
    for p in points.iter().filter(|p| p.scenario == scenario) {
        if let Some(k) = SERIES.iter().position(|s| s.1 == p.indicator) {
            series[k].insert(p.period, (p.mean, p.ci_low, p.ci_high));
        }
    }
    if let Some(k) = series.iter().position(BTreeMap::is_empty) {
        return Err(Error::data(format!("no `{}` rows for scenario `{scenario}`", SERIES[k].1)));
    }
    let max_period = series.iter().flat_map(|s| s.keys()).copied().max().unwrap_or(0).max(1);

    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (60.0, 110.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let x = |period: u32| left + pw * f64::from(period) / f64::from(max_period);
    let y = |v: f64| top + ph * (1.0 - v.clamp(0.0, 1.0));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let title = spec.title.clone().unwrap_or_else(|| format!("Mode shares: {scenario}"));
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        escape(&title)
    );
    // Axes, grid and ticks.
    for i in 0..=5 {
        let v = f64::from(i) / 5.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#e0e0e0"/>"##,
            y(v),
            left + pw
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, left - 6.0, y(v) + 4.0);
    }
    for p in 0..=max_period {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{p}</text>"#, x(p), top + ph + 18.0);
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{0}" stroke="#333"/><line x1="{left}" y1="{0}" x2="{1}" y2="{0}" stroke="#333"/>"##,
        top + ph,
        left + pw
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">year</text>"#, left + pw / 2.0, h - 12.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {0})">share of commuters</text>"#,
        top + ph / 2.0
    );

    for (k, (label, _, colour)) in SERIES.iter().enumerate() {
        let s = &series[k];
        let upper: Vec<String> = s.iter().map(|(&p, v)| format!("{:.2},{:.2}", x(p), y(v.2))).collect();
        let lower: Vec<String> = s.iter().rev().map(|(&p, v)| format!("{:.2},{:.2}", x(p), y(v.1))).collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="band" data-series="{label}" points="{} {}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = s.iter().map(|(&p, v)| format!("{:.2},{:.2}", x(p), y(v.0))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-series="{label}" points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = top + 20.0 + 22.0 * k as f64;
        let lx = left + pw + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="3"/>"#,
            lx + 24.0
        );
        let _ = writeln!(svg, r#"<text class="legend" x="{}" y="{}">{label}</text>"#, lx + 30.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> String {
        let mut s = String::from("scenario,period,year,indicator,mean,ci_low,ci_high\n");
        for p in 0..3 {
            for (ind, v) in [("share_car", 0.5), ("share_moto", 0.25), ("share_pub", 0.25), ("co2_kg", 900.0)] {
                let _ = writeln!(s, "base,{p},{p},{ind},{v},{},{}", v - 0.01, v + 0.01);
            }
        }
        s
    }

    #[test]
    fn three_lines_three_bands_three_labels() {
        let pts = read_aggregate(sample().as_bytes()).unwrap();
        let svg = plot_shares(&pts, &PlotSpec::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("class=\"band\"").count(), 3);
        for label in ["mot", "car", "pub"] {
            assert!(svg.contains(&format!(">{label}</text>")));
        }
        assert!(svg.contains(">0.0</text>") && svg.contains(">1.0</text>"));
    }

    #[test]
    fn empty_input_is_an_error() {
        let pts = read_aggregate("scenario,period,year,indicator,mean,ci_low,ci_high\n".as_bytes()).unwrap();
        assert!(plot_shares(&pts, &PlotSpec::default()).is_err());
        assert!(read_aggregate("a,b\n".as_bytes()).is_err());
    }
}
