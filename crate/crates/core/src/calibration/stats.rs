//! Sample sizing and rank-based / contingency hypothesis tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Cochran's sample size with finite-population correction, rounded up.
pub fn cochran_sample_size(population: f64, z: f64, margin: f64, p: f64) -> Result<u64> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::data(format!("margin of error {margin} must lie in (0, 1)")));
    }
    if !(population >= 1.0 && population.is_finite()) {
        return Err(Error::data(format!("population size {population} must be at least 1")));
    }
    if !(0.0..=1.0).contains(&p) || !(z.is_finite() && z > 0.0) {
        return Err(Error::data("z must be positive and p within [0, 1]"));
    }
    let n0 = z * z * p * (1.0 - p) / (margin * margin);
    let n = n0 / (1.0 + (n0 - 1.0) / population);
    // Guard against 80.0000000001 style round-off before taking the ceiling.
    let n = (n - 1e-9).ceil().max(1.0);
    Ok(n.min(population.ceil()) as u64)
}

/// Average ranks (1-based) of the pooled data plus the tie-correction sum Σ(t³ − t).
pub fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let d = ChiSquared::new(df).expect("positive degrees of freedom");
    d.sf(x).clamp(0.0, 1.0)
}

/// Kruskal–Wallis H with tie correction and chi-square p-value on k − 1 df.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::data("Kruskal-Wallis needs at least two groups"));
    }
    if let Some(g) = groups.iter().position(|g| g.is_empty()) {
        return Err(Error::data(format!("group {g} is empty")));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite observation"));
    }
    let n = pooled.len() as f64;
    if pooled.len() < 3 {
        return Err(Error::data("Kruskal-Wallis needs at least three observations"));
    }
    let (ranks, ties) = average_ranks(&pooled);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h_raw = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
    let correction = 1.0 - ties / (n * n * n - n);
    let h = if correction <= 0.0 { 0.0 } else { (h_raw / correction).max(0.0) };
    let df = (groups.len() - 1) as f64;
    Ok(TestResult { statistic: h, df, p_value: chi2_sf(h, df) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// min(U_a, U_b).
    pub u: f64,
    /// U computed for the first sample.
    pub u_a: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Two-sided Mann–Whitney U test, normal approximation with tie and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::data("Mann-Whitney needs two non-empty samples"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite observation"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let (ranks, ties) = average_ranks(&pooled);
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u_a = ra - na * (na + 1.0) / 2.0;
    let u_b = na * nb - u_a;
    let mu = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let (z, p) = if var <= 0.0 {
        (0.0, 1.0)
    } else {
        let z = ((u_a - mu).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (z, (2.0 * normal.sf(z)).min(1.0))
    };
    Ok(MannWhitney { u: u_a.min(u_b), u_a, z, p_value: p })
}

/// Pearson chi-square test of independence on an r × c table of counts.
pub fn chi_square_independence(table: &[Vec<f64>]) -> Result<TestResult> {
    let r = table.len();
    let c = table.first().map_or(0, Vec::len);
    if r < 2 || c < 2 {
        return Err(Error::data("contingency table must be at least 2x2"));
    }
    if table.iter().any(|row| row.len() != c) {
        return Err(Error::data("contingency table rows have different lengths"));
    }
    if table.iter().flatten().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(Error::data("counts must be non-negative"));
    }
    let rows: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let cols: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum()).collect();
    let total: f64 = rows.iter().sum();
    if let Some(i) = rows.iter().position(|&s| s == 0.0) {
        return Err(Error::data(format!("row {i} of the contingency table is empty")));
    }
    if let Some(j) = cols.iter().position(|&s| s == 0.0) {
        return Err(Error::data(format!("column {j} of the contingency table is empty")));
    }
    let mut chi2 = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] * cols[j] / total;
            chi2 += (o - e) * (o - e) / e;
        }
    }
    let df = ((r - 1) * (c - 1)) as f64;
    Ok(TestResult { statistic: chi2, df, p_value: chi2_sf(chi2, df) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    /// Mean of a − b.
    pub mean_diff: f64,
    pub se: f64,
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for H1: mean(a − b) > 0.
    pub p_greater: f64,
}

/// Paired t-test on matched samples (common random numbers).
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::data("paired test needs two samples of equal length >= 2"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let df = n - 1.0;
    if se == 0.0 {
        let p = if mean > 0.0 { 0.0 } else { 1.0 };
        let t = if mean == 0.0 { 0.0 } else { mean.signum() * f64::INFINITY };
        return Ok(PairedTest { mean_diff: mean, se, t, df, p_greater: p });
    }
    let t = mean / se;
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    Ok(PairedTest { mean_diff: mean, se, t, df, p_greater: dist.sf(t).clamp(0.0, 1.0) })
}
