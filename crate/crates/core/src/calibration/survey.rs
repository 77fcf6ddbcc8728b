//! Survey ingestion, Likert normalisation and the descriptive test battery.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::Rng;
use serde::Serialize;

use super::stats::{chi_square_independence, kruskal_wallis, mann_whitney_u, MannWhitney, TestResult};
use crate::consumat::ModeId;
use crate::error::{Error, Result};
use crate::population::{Agent, AttributeId, PerSes, Sex, SocioEconomicGroup, WeightTable, N_ATTRIBUTES};

/// Number of points on the importance scale.
pub const LIKERT_MAX: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRow {
    pub id: String,
    pub ses: SocioEconomicGroup,
    pub sex: Sex,
    pub age: u32,
    pub chosen_mode: ModeId,
    /// Importance ratings 1..=5 in [`AttributeId`] order.
    pub likert: [u8; N_ATTRIBUTES],
    /// Extra numeric columns, aligned with [`SurveyTable::covariate_names`].
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurveyTable {
    pub covariate_names: Vec<String>,
    pub rows: Vec<SurveyRow>,
}

const FIXED: [&str; 5] = ["id", "ses", "sex", "age", "mode"];

impl SurveyTable {
    /// Reads a header-named CSV. Required columns: `id,ses,sex,age,mode` and one
    /// column per attribute; any further column is read as a numeric covariate.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers().map_err(|e| Error::data(format!("survey header: {e}")))?.clone();
        let find = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::data(format!("survey is missing column `{name}`")))
        };
        let fixed: Vec<usize> = FIXED.iter().map(|c| find(c)).collect::<Result<_>>()?;
        let likert_cols: Vec<usize> = AttributeId::ALL.iter().map(|a| find(a.column())).collect::<Result<_>>()?;
        let known: Vec<usize> = fixed.iter().chain(&likert_cols).copied().collect();
        let cov_cols: Vec<usize> = (0..headers.len()).filter(|i| !known.contains(i)).collect();
        let covariate_names = cov_cols.iter().map(|&i| headers[i].to_string()).collect();

        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::data(format!("survey row {}: {e}", line + 1)))?;
            let at = |col: usize| rec.get(col).unwrap_or("");
            let bad = |col: usize, what: &str| {
                Error::data(format!(
                    "survey row {}: column `{}` has invalid {what} `{}`",
                    line + 1,
                    &headers[col],
                    at(col)
                ))
            };
            let ses = SocioEconomicGroup::parse(at(fixed[1])).ok_or_else(|| bad(fixed[1], "group"))?;
            let sex = Sex::parse(at(fixed[2])).ok_or_else(|| bad(fixed[2], "sex"))?;
            let age: u32 = at(fixed[3]).parse().map_err(|_| bad(fixed[3], "age"))?;
            let chosen_mode = ModeId::parse(at(fixed[4])).ok_or_else(|| bad(fixed[4], "mode"))?;
            let mut likert = [0u8; N_ATTRIBUTES];
            for (k, &col) in likert_cols.iter().enumerate() {
                let v: u8 = at(col).parse().map_err(|_| bad(col, "rating"))?;
                if !(1..=LIKERT_MAX).contains(&v) {
                    return Err(bad(col, "rating"));
                }
                likert[k] = v;
            }
            let covariates = cov_cols
                .iter()
                .map(|&col| at(col).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(col, "number")))
                .collect::<Result<_>>()?;
            rows.push(SurveyRow { id: at(fixed[0]).to_string(), ses, sex, age, chosen_mode, likert, covariates });
        }
        if rows.is_empty() {
            return Err(Error::data("survey has no rows"));
        }
        Ok(SurveyTable { covariate_names, rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = FIXED.to_vec();
        header.extend(AttributeId::ALL.iter().map(|a| a.column()));
        header.extend(self.covariate_names.iter().map(String::as_str));
        w.write_record(&header).map_err(write_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.id.clone(),
                r.ses.label().into(),
                r.sex.label().into(),
                r.age.to_string(),
                r.chosen_mode.label().into(),
            ];
            rec.extend(r.likert.iter().map(u8::to_string));
            rec.extend(r.covariates.iter().map(f64::to_string));
            w.write_record(&rec).map_err(write_err)?;
        }
        w.flush().map_err(|e| Error::Runtime(e.to_string()))
    }

    /// Ratings rescaled to [0,1] for one attribute, split by group.
    pub fn scores_by_ses(&self, attr: AttributeId) -> [Vec<f64>; 3] {
        let mut out: [Vec<f64>; 3] = Default::default();
        for r in &self.rows {
            out[r.ses.index()].push(likert_score(r.likert[attr.index()]));
        }
        out
    }
}

fn write_err(e: csv::Error) -> Error {
    Error::Runtime(format!("csv: {e}"))
}

pub fn likert_score(v: u8) -> f64 {
    f64::from(v) / f64::from(LIKERT_MAX)
}

/// Group means and sample standard deviations of the rescaled ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightEstimate {
    pub table: WeightTable,
    pub counts: [usize; 3],
}

pub fn normalize_weights(survey: &SurveyTable) -> Result<WeightEstimate> {
    let mut means = PerSes { low: [0.0; N_ATTRIBUTES], mid: [0.0; N_ATTRIBUTES], high: [0.0; N_ATTRIBUTES] };
    let mut sds = means;
    let mut counts = [0usize; 3];
    for r in &survey.rows {
        counts[r.ses.index()] += 1;
    }
    for ses in SocioEconomicGroup::ALL {
        if counts[ses.index()] == 0 {
            return Err(Error::data(format!("no respondents in the `{ses}` group")));
        }
    }
    for attr in AttributeId::ALL {
        let by = survey.scores_by_ses(attr);
        for ses in SocioEconomicGroup::ALL {
            let v = &by[ses.index()];
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let sd =
                if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
            means.get_mut(ses)[attr.index()] = m;
            sds.get_mut(ses)[attr.index()] = sd;
        }
    }
    Ok(WeightEstimate { table: WeightTable { means, sds }, counts })
}

impl WeightEstimate {
    /// A `[population.weights]` fragment that can be pasted into a scenario file.
    pub fn to_scenario_toml(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Pop<'a> {
            weights: &'a WeightTable,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            population: Pop<'a>,
        }
        toml::to_string(&Doc { population: Pop { weights: &self.table } }).map_err(|e| Error::Runtime(e.to_string()))
    }
}

/// Turns a synthetic population into survey responses. Each rating is a
/// randomised rounding of 5·weight so that E[rating/5] equals the weight
/// whenever the weight lies in [0.2, 1].
pub fn survey_from_population<R: Rng + ?Sized>(agents: &[Agent], rng: &mut R) -> SurveyTable {
    let covariate_names = ["income_m", "distance_km", "female"].map(String::from).to_vec();
    let rows = agents
        .iter()
        .map(|a| {
            let mut likert = [0u8; N_ATTRIBUTES];
            for (k, &w) in a.weights.iter().enumerate() {
                let x = (w * f64::from(LIKERT_MAX)).clamp(1.0, f64::from(LIKERT_MAX));
                let lo = x.floor();
                let up = rng.random::<f64>() < x - lo;
                likert[k] = (lo as u8 + u8::from(up)).min(LIKERT_MAX);
            }
            SurveyRow {
                id: a.id.to_string(),
                ses: a.ses,
                sex: a.sex,
                age: a.age,
                chosen_mode: a.current_mode,
                likert,
                covariates: vec![a.income / 1e6, a.commute_distance, f64::from(u8::from(a.sex == Sex::F))],
            }
        })
        .collect();
    SurveyTable { covariate_names, rows }
}

#[derive(Debug, Clone)]
pub struct AttributeTests {
    pub attribute: AttributeId,
    pub kruskal_wallis: TestResult,
    /// low-mid, low-high, mid-high.
    pub pairwise: [MannWhitney; 3],
}

#[derive(Debug, Clone)]
pub struct SurveyReport {
    pub n: usize,
    pub attributes: Vec<AttributeTests>,
    pub mode_by_ses: TestResult,
    pub mode_by_sex: TestResult,
    pub weights: WeightEstimate,
}

const PAIRS: [(SocioEconomicGroup, SocioEconomicGroup); 3] = [
    (SocioEconomicGroup::Low, SocioEconomicGroup::Mid),
    (SocioEconomicGroup::Low, SocioEconomicGroup::High),
    (SocioEconomicGroup::Mid, SocioEconomicGroup::High),
];

/// Kruskal–Wallis across groups per attribute, pairwise Mann–Whitney,
/// chi-square of mode against group and sex, and the normalised weights.
pub fn survey_report(survey: &SurveyTable) -> Result<SurveyReport> {
    let weights = normalize_weights(survey)?;
    let mut attributes = Vec::new();
    for attr in AttributeId::ALL {
        let by = survey.scores_by_ses(attr);
        let kw = kruskal_wallis(&[&by[0], &by[1], &by[2]])?;
        let mut pairwise = Vec::with_capacity(3);
        for (a, b) in PAIRS {
            pairwise.push(mann_whitney_u(&by[a.index()], &by[b.index()])?);
        }
        let pairwise: [MannWhitney; 3] = pairwise.try_into().expect("three pairs");
        attributes.push(AttributeTests { attribute: attr, kruskal_wallis: kw, pairwise });
    }
    let mut by_ses = vec![vec![0.0; 3]; 3];
    let mut by_sex = vec![vec![0.0; 3]; 2];
    for r in &survey.rows {
        by_ses[r.ses.index()][r.chosen_mode.index()] += 1.0;
        by_sex[r.sex.index()][r.chosen_mode.index()] += 1.0;
    }
    let mode_by_ses = chi_square_independence(&drop_empty_columns(by_ses))?;
    let mode_by_sex = chi_square_independence(&drop_empty_columns(by_sex))?;
    Ok(SurveyReport { n: survey.rows.len(), attributes, mode_by_ses, mode_by_sex, weights })
}

fn drop_empty_columns(t: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let keep: Vec<usize> = (0..t[0].len()).filter(|&j| t.iter().any(|r| r[j] > 0.0)).collect();
    t.into_iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect()
}

fn stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        _ => "",
    }
}

impl SurveyReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "respondents: {}", self.n);
        let _ = writeln!(s, "\nattribute importance across groups (Kruskal-Wallis, Mann-Whitney p)");
        let _ = writeln!(
            s,
            "{:<18} {:>8} {:>10} {:>10} {:>10} {:>10}",
            "attribute", "H", "p", "low-mid", "low-high", "mid-high"
        );
        for a in &self.attributes {
            let kw = a.kruskal_wallis;
            let _ = write!(
                s,
                "{:<18} {:>8.3} {:>7.4}{:<3}",
                a.attribute.column(),
                kw.statistic,
                kw.p_value,
                stars(kw.p_value)
            );
            for mw in &a.pairwise {
                let _ = write!(s, " {:>7.4}{:<3}", mw.p_value, stars(mw.p_value));
            }
            s.push('\n');
        }
        for (name, t) in [("mode x group", self.mode_by_ses), ("mode x sex", self.mode_by_sex)] {
            let _ = writeln!(
                s,
                "\nchi-square {name}: {:.3} on {} df, p = {:.4}{}",
                t.statistic,
                t.df,
                t.p_value,
                stars(t.p_value)
            );
        }
        let _ = writeln!(s, "\nnormalised weights (mean / sd)");
        for ses in SocioEconomicGroup::ALL {
            let m = self.weights.table.means.get(ses);
            let sd = self.weights.table.sds.get(ses);
            let cells: Vec<String> = AttributeId::ALL
                .iter()
                .map(|a| format!("{}={:.3}/{:.3}", a.short(), m[a.index()], sd[a.index()]))
                .collect();
            let _ = writeln!(s, "  {:<5} n={:<5} {}", ses.label(), self.weights.counts[ses.index()], cells.join(" "));
        }
        s
    }

    /// Flat key-value document with the test statistics and the weight fragment.
    pub fn to_kv(&self) -> Result<String> {
        let mut tests: BTreeMap<String, BTreeMap<&str, f64>> = BTreeMap::new();
        for a in &self.attributes {
            let mut m = BTreeMap::new();
            m.insert("kw_h", a.kruskal_wallis.statistic);
            m.insert("kw_p", a.kruskal_wallis.p_value);
            for ((x, y), mw) in PAIRS.iter().zip(&a.pairwise) {
                let key: &'static str = match (x, y) {
                    (SocioEconomicGroup::Low, SocioEconomicGroup::Mid) => "mwu_p_low_mid",
                    (SocioEconomicGroup::Low, SocioEconomicGroup::High) => "mwu_p_low_high",
                    _ => "mwu_p_mid_high",
                };
                m.insert(key, mw.p_value);
            }
            tests.insert(a.attribute.column().to_string(), m);
        }
        for (name, t) in [("mode_by_ses", self.mode_by_ses), ("mode_by_sex", self.mode_by_sex)] {
            tests.insert(name.into(), BTreeMap::from([("chi2", t.statistic), ("df", t.df), ("p", t.p_value)]));
        }
        #[derive(Serialize)]
        struct Doc {
            tests: BTreeMap<String, BTreeMap<&'static str, f64>>,
        }
        let mut out = toml::to_string(&Doc { tests }).map_err(|e| Error::Runtime(e.to_string()))?;
        out.push('\n');
        out.push_str(&self.weights.to_scenario_toml()?);
        Ok(out)
    }
}
