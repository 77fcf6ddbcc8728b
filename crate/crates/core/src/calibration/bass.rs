//! Bass diffusion curve, least-squares fitting and trajectory comparison.

use std::io::Read;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BassParams {
    /// Innovation coefficient.
    pub p: f64,
    /// Imitation coefficient.
    pub q: f64,
    /// Market potential.
    pub m: f64,
}

impl BassParams {
    pub fn validate(&self) -> Result<()> {
        if [self.p, self.q, self.m].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::data(format!("Bass parameters must be positive, got {self:?}")))
        }
    }

    /// Time of the adoption-rate peak.
    pub fn peak_time(&self) -> f64 {
        (self.q / self.p).ln() / (self.p + self.q)
    }
}

/// Cumulative adopters at time `t` (t ≥ 0).
pub fn bass_curve(params: &BassParams, t: f64) -> f64 {
    let BassParams { p, q, m } = *params;
    let e = (-(p + q) * t).exp();
    m * (1.0 - e) / (1.0 + (q / p) * e)
}

/// Gradient of the curve with respect to (ln p, ln q, ln m).
fn log_gradient(params: &BassParams, t: f64) -> Vector3<f64> {
    let BassParams { p, q, m } = *params;
    let e = (-(p + q) * t).exp();
    let a = 1.0 - e;
    let r = q / p;
    let b = 1.0 + r * e;
    let de = -t * e;
    let dp = m * (-de * b - a * (-q / (p * p) * e + r * de)) / (b * b);
    let dq = m * (-de * b - a * (e / p + r * de)) / (b * b);
    Vector3::new(dp * p, dq * q, a / b * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BassFit {
    pub params: BassParams,
    /// Sum of squared residuals.
    pub sse: f64,
    pub rmse: f64,
    /// Calendar year mapped to t = 0; the first observation sits at t = 1.
    pub origin_year: f64,
    pub n_points: usize,
    /// Index of the winning multi-start.
    pub start: usize,
}

impl BassFit {
    pub fn predict_year(&self, year: f64) -> f64 {
        bass_curve(&self.params, year - self.origin_year)
    }
}

/// Reads a `year,cumulative_count` registry.
pub fn read_registry<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::data(format!("registry header: {e}")))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(format!("registry is missing column `{name}`")))
    };
    let (cy, cc) = (col("year")?, col("cumulative_count")?);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::data(format!("registry row {}: {e}", line + 1)))?;
        let num = |c: usize| -> Result<f64> {
            let raw = rec.get(c).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::data(format!("registry row {}: `{raw}` is not a number", line + 1)))
        };
        out.push((num(cy)?, num(cc)?));
    }
    Ok(out)
}

fn check_series(series: &[(f64, f64)]) -> Result<()> {
    if series.len() < 4 {
        return Err(Error::data(format!("Bass fitting needs at least 4 points, got {}", series.len())));
    }
    for w in series.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::data(format!("years must be strictly increasing ({} then {})", w[0].0, w[1].0)));
        }
        if w[1].1 <= w[0].1 {
            return Err(Error::data(format!(
                "cumulative counts must be strictly increasing ({} at {} then {} at {})",
                w[0].1, w[0].0, w[1].1, w[1].0
            )));
        }
    }
    if series[0].1 <= 0.0 {
        return Err(Error::data("cumulative counts must be positive"));
    }
    Ok(())
}

fn sse(params: &BassParams, pts: &[(f64, f64)]) -> f64 {
    pts.iter().map(|&(t, y)| (bass_curve(params, t) - y).powi(2)).sum()
}

fn from_log(z: &Vector3<f64>) -> BassParams {
    BassParams { p: z[0].exp(), q: z[1].exp(), m: z[2].exp() }
}

/// Levenberg–Marquardt on log-parameters from one starting point.
fn levenberg_marquardt(start: BassParams, pts: &[(f64, f64)]) -> (BassParams, f64) {
    let mut z = Vector3::new(start.p.ln(), start.q.ln(), start.m.ln());
    let mut cur = sse(&from_log(&z), pts);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let params = from_log(&z);
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for &(t, y) in pts {
            let g = log_gradient(&params, t);
            let r = y - bass_curve(&params, t);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let cand = z + step;
            let next = sse(&from_log(&cand), pts);
            if next.is_finite() && next <= cur {
                let gain = cur - next;
                z = cand;
                cur = next;
                lambda = (lambda / 10.0).max(1e-12);
                improved = gain > 1e-15 * cur.max(1e-300) && step.amax() > 1e-13;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (from_log(&z), cur)
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Least-squares Bass fit with a grid of starts over p, q and m.
pub fn bass_fit(series: &[(f64, f64)]) -> Result<BassFit> {
    check_series(series)?;
    let origin_year = series[0].0 - 1.0;
    let pts: Vec<(f64, f64)> = series.iter().map(|&(y, c)| (y - origin_year, c)).collect();
    let max = series.last().expect("non-empty").1;
    let mut best: Option<(usize, BassParams, f64)> = None;
    let mut idx = 0;
    for &p in &geomspace(1e-3, 0.1, 5) {
        for &q in &geomspace(0.1, 0.9, 5) {
            for &m in &geomspace(max, 10.0 * max, 4) {
                let (fit, err) = levenberg_marquardt(BassParams { p, q, m }, &pts);
                if fit.validate().is_ok() && best.as_ref().is_none_or(|b| err < b.2) {
                    best = Some((idx, fit, err));
                }
                idx += 1;
            }
        }
    }
    let (start, params, sse) = best.ok_or_else(|| Error::data("no multi-start produced a valid Bass fit"))?;
    Ok(BassFit { params, sse, rmse: (sse / pts.len() as f64).sqrt(), origin_year, n_points: pts.len(), start })
}

/// Yearly cumulative counts from a known curve, with multiplicative noise of
/// relative sd `noise` applied to each year's new adopters so the series stays
/// increasing. The first year sits at t = 1.
pub fn synthetic_registry(params: &BassParams, first_year: i32, n: usize, noise: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    (1..=n)
        .map(|t| {
            let new = bass_curve(params, t as f64) - bass_curve(params, t as f64 - 1.0);
            let z: f64 = rng.sample(StandardNormal);
            total += new * (1.0 + noise * z).max(0.01);
            (f64::from(first_year) + t as f64 - 1.0, total.round().max(1.0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryComparison {
    pub rmse: f64,
    /// Mean absolute percentage error, in percent, relative to the reference.
    pub mape: f64,
}

pub fn compare_trajectories(abm: &[f64], reference: &[f64]) -> Result<TrajectoryComparison> {
    if abm.len() != reference.len() || abm.is_empty() {
        return Err(Error::data(format!("series lengths differ or are empty ({} vs {})", abm.len(), reference.len())));
    }
    if reference.contains(&0.0) {
        return Err(Error::data("reference series contains zero; percentage error undefined"));
    }
    let n = abm.len() as f64;
    let rmse = (abm.iter().zip(reference).map(|(a, r)| (a - r).powi(2)).sum::<f64>() / n).sqrt();
    let mape = 100.0 * abm.iter().zip(reference).map(|(a, r)| ((a - r) / r).abs()).sum::<f64>() / n;
    Ok(TrajectoryComparison { rmse, mape })
}
