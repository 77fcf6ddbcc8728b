//! Multinomial logit by Newton–Raphson with step halving, plus Wald tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Name given to the alternative-specific constants.
pub const INTERCEPT: &str = "const";

/// Choice observations. Every non-reference alternative gets a constant plus
/// one coefficient per covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceData {
    pub alternatives: Vec<String>,
    pub reference: usize,
    pub covariates: Vec<String>,
    /// n × K covariate matrix, without the constant column.
    pub x: DMatrix<f64>,
    /// Chosen alternative per row.
    pub y: Vec<usize>,
}

impl ChoiceData {
    pub fn new(
        alternatives: Vec<String>,
        reference: usize,
        covariates: Vec<String>,
        x: DMatrix<f64>,
        y: Vec<usize>,
    ) -> Result<Self> {
        if alternatives.len() < 2 {
            return Err(Error::data("a choice model needs at least two alternatives"));
        }
        if reference >= alternatives.len() {
            return Err(Error::data("reference alternative out of range"));
        }
        if x.nrows() != y.len() || x.ncols() != covariates.len() {
            return Err(Error::data("covariate matrix does not match observations"));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= alternatives.len()) {
            return Err(Error::data(format!("choice index {bad} out of range")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("non-finite covariate value"));
        }
        Ok(ChoiceData { alternatives, reference, covariates, x, y })
    }

    /// Reads choices and covariates from named CSV columns. Alternatives are
    /// the distinct labels of `choice_col` in sorted order.
    pub fn from_csv<R: Read>(input: R, choice_col: &str, reference: &str, vars: &[String]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers().map_err(|e| Error::data(format!("header: {e}")))?.clone();
        let find = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::data(format!("missing column `{name}`")))
        };
        let c = find(choice_col)?;
        let cols: Vec<usize> = vars.iter().map(|v| find(v)).collect::<Result<_>>()?;
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::data(format!("row {}: {e}", line + 1)))?;
            labels.push(rec.get(c).unwrap_or("").to_string());
            for (&col, name) in cols.iter().zip(vars) {
                let raw = rec.get(col).unwrap_or("");
                let v: f64 = raw
                    .parse()
                    .map_err(|_| Error::data(format!("row {}: column `{name}` is not numeric (`{raw}`)", line + 1)))?;
                values.push(v);
            }
        }
        if labels.is_empty() {
            return Err(Error::data("no observations"));
        }
        let mut alternatives: Vec<String> = labels.clone();
        alternatives.sort();
        alternatives.dedup();
        let reference = alternatives
            .iter()
            .position(|a| a == reference)
            .ok_or_else(|| Error::data(format!("reference `{reference}` never appears in `{choice_col}`")))?;
        let y = labels.iter().map(|l| alternatives.iter().position(|a| a == l).expect("label present")).collect();
        let x = DMatrix::from_row_slice(labels.len(), vars.len(), &values);
        ChoiceData::new(alternatives, reference, vars.to_vec(), x, y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Coefficients per non-reference alternative (constant included).
    pub fn block(&self) -> usize {
        self.covariates.len() + 1
    }

    pub fn n_params(&self) -> usize {
        (self.alternatives.len() - 1) * self.block()
    }

    /// Non-reference alternatives in parameter order.
    pub fn free_alternatives(&self) -> Vec<usize> {
        (0..self.alternatives.len()).filter(|&j| j != self.reference).collect()
    }

    /// Covariates of row `i` with the constant prepended.
    fn row(&self, i: usize) -> Vec<f64> {
        std::iter::once(1.0).chain(self.x.row(i).iter().copied()).collect()
    }

    /// Choice probabilities for every row under parameter vector `beta`.
    pub fn probabilities(&self, beta: &DVector<f64>) -> DMatrix<f64> {
        let free = self.free_alternatives();
        let b = self.block();
        let j = self.alternatives.len();
        let mut p = DMatrix::zeros(self.n(), j);
        let mut v = vec![0.0; j];
        for i in 0..self.n() {
            let xi = self.row(i);
            v.iter_mut().for_each(|u| *u = 0.0);
            for (f, &alt) in free.iter().enumerate() {
                v[alt] = (0..b).map(|k| beta[f * b + k] * xi[k]).sum();
            }
            softmax_into(&v, p.row_mut(i).iter_mut());
        }
        p
    }

    pub fn log_likelihood(&self, beta: &DVector<f64>) -> f64 {
        let p = self.probabilities(beta);
        self.y.iter().enumerate().map(|(i, &c)| p[(i, c)].max(f64::MIN_POSITIVE).ln()).sum()
    }

    /// Analytic score vector.
    pub fn gradient(&self, beta: &DVector<f64>) -> DVector<f64> {
        let p = self.probabilities(beta);
        self.gradient_from(&p)
    }

    fn gradient_from(&self, p: &DMatrix<f64>) -> DVector<f64> {
        let free = self.free_alternatives();
        let b = self.block();
        let mut g = DVector::zeros(self.n_params());
        for i in 0..self.n() {
            let xi = self.row(i);
            for (f, &alt) in free.iter().enumerate() {
                let r = f64::from(u8::from(self.y[i] == alt)) - p[(i, alt)];
                for k in 0..b {
                    g[f * b + k] += r * xi[k];
                }
            }
        }
        g
    }

    /// Observed information (negative Hessian of the log-likelihood).
    fn information(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let free = self.free_alternatives();
        let b = self.block();
        let np = self.n_params();
        let mut h = DMatrix::zeros(np, np);
        for i in 0..self.n() {
            let xi = self.row(i);
            for (f, &a) in free.iter().enumerate() {
                for (g, &c) in free.iter().enumerate() {
                    let w = if a == c { p[(i, a)] * (1.0 - p[(i, a)]) } else { -p[(i, a)] * p[(i, c)] };
                    for k in 0..b {
                        for l in 0..b {
                            h[(f * b + k, g * b + l)] += w * xi[k] * xi[l];
                        }
                    }
                }
            }
        }
        h
    }

    /// Coefficient label `alternative:covariate` for parameter index `idx`.
    pub fn param_name(&self, idx: usize) -> String {
        let b = self.block();
        let alt = &self.alternatives[self.free_alternatives()[idx / b]];
        format!("{alt}:{}", self.covariate_name(idx % b))
    }

    fn covariate_name(&self, k: usize) -> &str {
        if k == 0 {
            INTERCEPT
        } else {
            &self.covariates[k - 1]
        }
    }
}

fn softmax_into<'a>(v: &[f64], out: impl Iterator<Item = &'a mut f64>) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|u| (u - max).exp()).collect();
    let s: f64 = exps.iter().sum();
    for (o, e) in out.zip(exps) {
        *o = e / s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MnlOptions {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the score.
    pub grad_tol: f64,
    /// A standardised coefficient beyond this magnitude signals separation.
    pub separation_bound: f64,
}

impl Default for MnlOptions {
    fn default() -> Self {
        MnlOptions { max_iter: 200, grad_tol: 1e-6, separation_bound: 25.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnlModel {
    pub alternatives: Vec<String>,
    pub reference: usize,
    pub covariates: Vec<String>,
    /// J × (K+1) coefficients; the reference row is zero.
    pub coefficients: DMatrix<f64>,
    /// Free parameters in estimation order (non-reference alternatives, constant first).
    pub beta: DVector<f64>,
    /// Inverse observed information over `beta`.
    pub covariance: DMatrix<f64>,
    pub log_likelihood: f64,
    /// Log-likelihood of the constants-free equal-shares model.
    pub null_log_likelihood: f64,
    pub iterations: usize,
    pub n: usize,
    /// Log-likelihood after each accepted step, starting value first.
    pub trace: Vec<f64>,
}

/// Rejects covariates that are constant or linear combinations of earlier ones.
fn check_rank(data: &ChoiceData) -> Result<()> {
    let n = data.n();
    let mut basis: Vec<DVector<f64>> = vec![DVector::from_element(n, 1.0 / (n as f64).sqrt())];
    for (k, name) in data.covariates.iter().enumerate() {
        let col = data.x.column(k).into_owned();
        let norm = col.norm();
        let mut r = col;
        for q in &basis {
            let d = q.dot(&r);
            r -= q * d;
        }
        if norm == 0.0 || r.norm() <= 1e-9 * norm.max(1.0) {
            return Err(Error::Estimation {
                covariate: name.clone(),
                message: "covariate is constant or collinear with earlier covariates".into(),
            });
        }
        let len = r.norm();
        basis.push(r / len);
    }
    Ok(())
}

pub fn mnl_fit(data: &ChoiceData, opts: &MnlOptions) -> Result<MnlModel> {
    if data.n() <= data.n_params() {
        return Err(Error::data(format!("{} observations cannot identify {} parameters", data.n(), data.n_params())));
    }
    for (j, alt) in data.alternatives.iter().enumerate() {
        if !data.y.contains(&j) {
            return Err(Error::Estimation {
                covariate: INTERCEPT.into(),
                message: format!("alternative `{alt}` is never chosen"),
            });
        }
    }
    check_rank(data)?;
    let sds: Vec<f64> = (0..data.block())
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let c = data.x.column(k - 1);
                let m = c.mean();
                (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / data.n() as f64).sqrt()
            }
        })
        .collect();

    let np = data.n_params();
    let mut beta = DVector::zeros(np);
    let mut p = data.probabilities(&beta);
    let mut ll = loglik_from(data, &p);
    let null_ll = ll;
    let mut trace = vec![ll];
    let mut iterations = 0;
    loop {
        let g = data.gradient_from(&p);
        if g.amax() < opts.grad_tol {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::Estimation {
                covariate: data.param_name(g.iamax()),
                message: format!("no convergence after {iterations} iterations"),
            });
        }
        let info = data.information(&p);
        let step = info.clone().cholesky().map(|c| c.solve(&g)).ok_or_else(|| singular_error(data, &info))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &beta + &step * t;
            let pc = data.probabilities(&cand);
            let llc = loglik_from(data, &pc);
            if llc >= ll {
                beta = cand;
                p = pc;
                ll = llc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // Numerically flat: the score is as small as round-off allows.
            break;
        }
        trace.push(ll);
        if let Some(idx) = (0..np).find(|&i| (beta[i] * sds[i % data.block()]).abs() > opts.separation_bound) {
            return Err(Error::Estimation {
                covariate: data.covariate_name(idx % data.block()).to_string(),
                message: format!("coefficient `{}` diverges; the data appear separated", data.param_name(idx)),
            });
        }
    }
    let info = data.information(&p);
    let covariance = info.clone().try_inverse().ok_or_else(|| singular_error(data, &info))?;
    let free = data.free_alternatives();
    let mut coefficients = DMatrix::zeros(data.alternatives.len(), data.block());
    for (f, &alt) in free.iter().enumerate() {
        for k in 0..data.block() {
            coefficients[(alt, k)] = beta[f * data.block() + k];
        }
    }
    Ok(MnlModel {
        alternatives: data.alternatives.clone(),
        reference: data.reference,
        covariates: data.covariates.clone(),
        coefficients,
        beta,
        covariance,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        iterations,
        n: data.n(),
        trace,
    })
}

fn loglik_from(data: &ChoiceData, p: &DMatrix<f64>) -> f64 {
    data.y.iter().enumerate().map(|(i, &c)| p[(i, c)].max(f64::MIN_POSITIVE).ln()).sum()
}

fn singular_error(data: &ChoiceData, info: &DMatrix<f64>) -> Error {
    let idx = (0..info.nrows()).min_by(|&a, &b| info[(a, a)].total_cmp(&info[(b, b)])).unwrap_or(0);
    Error::Estimation {
        covariate: data.covariate_name(idx % data.block()).to_string(),
        message: "information matrix is singular (separation or rank deficiency)".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl MnlModel {
    pub fn block(&self) -> usize {
        self.covariates.len() + 1
    }

    /// Index into `beta` of (alternative label, covariate name or `const`).
    pub fn param_index(&self, alternative: &str, covariate: &str) -> Option<usize> {
        let alt = self.alternatives.iter().position(|a| a == alternative)?;
        if alt == self.reference {
            return None;
        }
        let f = (0..self.alternatives.len()).filter(|&j| j != self.reference).position(|j| j == alt)?;
        let k = if covariate == INTERCEPT { 0 } else { 1 + self.covariates.iter().position(|c| c == covariate)? };
        Some(f * self.block() + k)
    }

    pub fn standard_error(&self, idx: usize) -> f64 {
        self.covariance[(idx, idx)].sqrt()
    }

    /// Choice probabilities for one covariate vector.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.covariates.len() {
            return Err(Error::data(format!("expected {} covariates, got {}", self.covariates.len(), x.len())));
        }
        let v: Vec<f64> = (0..self.alternatives.len())
            .map(|j| {
                self.coefficients[(j, 0)]
                    + x.iter().enumerate().map(|(k, xk)| self.coefficients[(j, k + 1)] * xk).sum::<f64>()
            })
            .collect();
        let mut out = vec![0.0; v.len()];
        softmax_into(&v, out.iter_mut());
        Ok(out)
    }

    /// Joint Wald test that the listed coefficients are all zero.
    pub fn wald_test(&self, indices: &[usize]) -> Result<WaldResult> {
        if indices.is_empty() || indices.iter().any(|&i| i >= self.beta.len()) {
            return Err(Error::data("invalid coefficient block for the Wald test"));
        }
        let b = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.beta[i]));
        let v = DMatrix::from_fn(indices.len(), indices.len(), |r, c| self.covariance[(indices[r], indices[c])]);
        let vinv = v.try_inverse().ok_or_else(|| Error::Estimation {
            covariate: self.covariates.first().cloned().unwrap_or_else(|| INTERCEPT.into()),
            message: "covariance block is singular".into(),
        })?;
        let w = (b.transpose() * vinv * &b)[(0, 0)].max(0.0);
        let df = indices.len();
        let p = if w == 0.0 { 1.0 } else { ChiSquared::new(df as f64).expect("df > 0").sf(w).clamp(0.0, 1.0) };
        Ok(WaldResult { statistic: w, df, p_value: p })
    }

    /// Tests a covariate across every non-reference alternative.
    pub fn wald_covariate(&self, covariate: &str) -> Result<WaldResult> {
        let idx: Vec<usize> = self
            .alternatives
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != self.reference)
            .map(|(_, a)| self.param_index(a, covariate))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::data(format!("unknown covariate `{covariate}`")))?;
        self.wald_test(&idx)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "multinomial logit: n = {}, reference = {}, iterations = {}",
            self.n, self.alternatives[self.reference], self.iterations
        );
        let _ = writeln!(s, "log-likelihood {:.4} (equal shares {:.4})", self.log_likelihood, self.null_log_likelihood);
        let _ = writeln!(s, "{:<28} {:>11} {:>10} {:>9} {:>10}", "coefficient", "estimate", "se", "z", "p");
        for (j, alt) in self.alternatives.iter().enumerate() {
            if j == self.reference {
                continue;
            }
            for cov in std::iter::once(INTERCEPT).chain(self.covariates.iter().map(String::as_str)) {
                let idx = self.param_index(alt, cov).expect("valid index");
                let w = self.wald_test(&[idx]).expect("valid index");
                let se = self.standard_error(idx);
                let _ = writeln!(
                    s,
                    "{:<28} {:>11.5} {:>10.5} {:>9.3} {:>10.3e}",
                    format!("{alt}:{cov}"),
                    self.beta[idx],
                    se,
                    self.beta[idx] / se,
                    w.p_value
                );
            }
        }
        let _ = writeln!(s, "\njoint Wald tests per covariate");
        for cov in &self.covariates {
            if let Ok(w) = self.wald_covariate(cov) {
                let _ = writeln!(s, "{:<28} W = {:>10.3} df = {} p = {:.3e}", cov, w.statistic, w.df, w.p_value);
            }
        }
        s
    }

    pub fn to_kv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Coef {
            estimate: f64,
            se: f64,
            p: f64,
        }
        #[derive(Serialize)]
        struct Doc {
            n: usize,
            reference: String,
            log_likelihood: f64,
            null_log_likelihood: f64,
            coefficients: BTreeMap<String, Coef>,
        }
        let mut coefficients = BTreeMap::new();
        for idx in 0..self.beta.len() {
            let b = self.block();
            let alt = (0..self.alternatives.len()).filter(|&j| j != self.reference).nth(idx / b).expect("free alt");
            let cov = if idx % b == 0 { INTERCEPT } else { self.covariates[idx % b - 1].as_str() };
            let p = self.wald_test(&[idx])?.p_value;
            coefficients.insert(
                format!("{}:{}", self.alternatives[alt], cov),
                Coef { estimate: self.beta[idx], se: self.standard_error(idx), p },
            );
        }
        #[derive(Serialize)]
        struct Wrap {
            mnl: Doc,
        }
        let doc = Doc {
            n: self.n,
            reference: self.alternatives[self.reference].clone(),
            log_likelihood: self.log_likelihood,
            null_log_likelihood: self.null_log_likelihood,
            coefficients,
        };
        toml::to_string(&Wrap { mnl: doc }).map_err(|e| Error::Runtime(e.to_string()))
    }
}
