//! Synthetic commuter population: demographics, attribute weights,
//! cognitive parameters and the initial mode assignment.

use std::fmt;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::consumat::ModeId;
use crate::dist::{categorical, check_probabilities, BoundedDist, LogNormalSpec};
use crate::error::{Error, Result};

pub const N_ATTRIBUTES: usize = 7;

/// A value per mode attribute, laid out in [`AttributeId`] order.
pub type AttributeVector = [f64; N_ATTRIBUTES];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocioEconomicGroup {
    Low,
    Mid,
    High,
}

impl SocioEconomicGroup {
    pub const ALL: [SocioEconomicGroup; 3] = [Self::Low, Self::Mid, Self::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::Mid => "mid",
            Self::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" | "l" | "1" => Some(Self::Low),
            "mid" | "middle" | "m" | "2" => Some(Self::Mid),
            "high" | "h" | "3" => Some(Self::High),
            _ => None,
        }
    }
}

impl fmt::Display for SocioEconomicGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::F, Sex::M];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Sex::F => "F",
            Sex::M => "M",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F" | "FEMALE" | "W" => Some(Sex::F),
            "M" | "MALE" => Some(Sex::M),
            _ => None,
        }
    }
}

/// Age bands of the initial-mode table: 16–29, 30–59, 60+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeBand {
    Young,
    Adult,
    Senior,
}

impl AgeBand {
    pub const ALL: [AgeBand; 3] = [AgeBand::Young, AgeBand::Adult, AgeBand::Senior];

    pub fn of(age: u32) -> Self {
        match age {
            0..=29 => AgeBand::Young,
            30..=59 => AgeBand::Adult,
            _ => AgeBand::Senior,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The seven mode attributes agents evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeId {
    AcquisitionCost,
    OperatingCost,
    Comfort,
    RoadSafety,
    PersonalSecurity,
    TravelTime,
    Emissions,
}

impl AttributeId {
    pub const ALL: [AttributeId; N_ATTRIBUTES] = [
        Self::AcquisitionCost,
        Self::OperatingCost,
        Self::Comfort,
        Self::RoadSafety,
        Self::PersonalSecurity,
        Self::TravelTime,
        Self::Emissions,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name used in survey files.
    pub fn column(self) -> &'static str {
        match self {
            Self::AcquisitionCost => "acquisition_cost",
            Self::OperatingCost => "operating_cost",
            Self::Comfort => "comfort",
            Self::RoadSafety => "road_safety",
            Self::PersonalSecurity => "personal_security",
            Self::TravelTime => "travel_time",
            Self::Emissions => "emissions",
        }
    }

    /// Short suffix used in the population dump (`w_<short>`).
    pub fn short(self) -> &'static str {
        match self {
            Self::AcquisitionCost => "accost",
            Self::OperatingCost => "opcost",
            Self::Comfort => "comfort",
            Self::RoadSafety => "safety",
            Self::PersonalSecurity => "security",
            Self::TravelTime => "time",
            Self::Emissions => "emis",
        }
    }
}

/// One commuter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    pub id: usize,
    pub sex: Sex,
    pub age: u32,
    pub ses: SocioEconomicGroup,
    /// One-way commute, km.
    pub commute_distance: f64,
    /// Monthly income, currency units.
    pub income: f64,
    pub weights: AttributeVector,
    pub sat_threshold: f64,
    pub unc_threshold: f64,
    pub uncertainty_avoidance: f64,
    pub collectivism: f64,
    pub current_mode: ModeId,
    /// Familiarity with each mode, indexed by [`ModeId::index`].
    pub experience: [f64; 3],
    /// Private vehicles the agent already has access to.
    pub owns: [bool; 3],
}

impl Agent {
    pub fn annual_income(&self) -> f64 {
        12.0 * self.income
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// A value per socioeconomic group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerSes<T> {
    pub low: T,
    pub mid: T,
    pub high: T,
}

impl<T> PerSes<T> {
    pub fn get(&self, ses: SocioEconomicGroup) -> &T {
        match ses {
            SocioEconomicGroup::Low => &self.low,
            SocioEconomicGroup::Mid => &self.mid,
            SocioEconomicGroup::High => &self.high,
        }
    }

    pub fn get_mut(&mut self, ses: SocioEconomicGroup) -> &mut T {
        match ses {
            SocioEconomicGroup::Low => &mut self.low,
            SocioEconomicGroup::Mid => &mut self.mid,
            SocioEconomicGroup::High => &mut self.high,
        }
    }
}

/// Importance weights per socioeconomic group, ordered by [`AttributeId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTable {
    pub means: PerSes<AttributeVector>,
    pub sds: PerSes<AttributeVector>,
}

impl Default for WeightTable {
    fn default() -> Self {
        // Low: cost and time first, emissions last. Mid: time, comfort,
        // security first. High: same ordering as Mid with higher scores.
        WeightTable {
            means: PerSes {
                low: [0.90, 0.80, 0.50, 0.55, 0.45, 0.85, 0.30],
                mid: [0.60, 0.65, 0.80, 0.70, 0.78, 0.85, 0.35],
                high: [0.62, 0.60, 0.90, 0.80, 0.88, 0.92, 0.38],
            },
            sds: PerSes { low: [0.08; 7], mid: [0.08; 7], high: [0.08; 7] },
        }
    }
}

impl WeightTable {
    pub fn validate(&self, field: &str) -> Result<()> {
        for ses in SocioEconomicGroup::ALL {
            for (k, &m) in self.means.get(ses).iter().enumerate() {
                if !(0.0..=1.0).contains(&m) {
                    return Err(Error::config(
                        format!("{field}.means.{ses}[{k}]"),
                        format!("weight mean {m} outside [0, 1]"),
                    ));
                }
            }
            for (k, &s) in self.sds.get(ses).iter().enumerate() {
                if !(s.is_finite() && s >= 0.0) {
                    return Err(Error::config(format!("{field}.sds.{ses}[{k}]"), "sd must be non-negative"));
                }
            }
            if self.means.get(ses).iter().all(|&m| m == 0.0) && self.sds.get(ses).iter().all(|&s| s == 0.0) {
                return Err(Error::config(
                    format!("{field}.means.{ses}"),
                    "all-zero weights make satisfaction undefined",
                ));
            }
        }
        Ok(())
    }
}

/// One cell of the initial-mode table: P(mode | ses, sex, age band).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitModeRow {
    pub ses: SocioEconomicGroup,
    pub sex: Sex,
    pub age_band: AgeBand,
    pub car: f64,
    pub motorcycle: f64,
    pub public: f64,
}

impl InitModeRow {
    pub fn probs(&self) -> [f64; 3] {
        [self.car, self.motorcycle, self.public]
    }
}

/// The default initial-mode table.
///
/// Private-mode probability rises with income and age and is higher for
/// men; the car/motorcycle split shifts toward cars with income. With the
/// default demographics the population starts near 51% car, 23% motorcycle
/// and 26% public transit.
pub fn default_init_mode_rows() -> Vec<InitModeRow> {
    let mut rows = Vec::with_capacity(18);
    for ses in SocioEconomicGroup::ALL {
        let (base, car_fraction, young_penalty) = match ses {
            SocioEconomicGroup::Low => (0.64, 0.40, 0.14),
            SocioEconomicGroup::Mid => (0.80, 0.74, 0.12),
            SocioEconomicGroup::High => (0.90, 0.95, 0.06),
        };
        for sex in Sex::ALL {
            let sex_shift = if sex == Sex::M { 0.08 } else { -0.08 };
            for band in AgeBand::ALL {
                let age_shift = match band {
                    AgeBand::Young => -young_penalty,
                    AgeBand::Adult => 0.0,
                    AgeBand::Senior => 0.03,
                };
                let private: f64 = base + sex_shift + age_shift;
                let private = private.clamp(0.0, 0.97);
                let car = round6(private * car_fraction);
                let motorcycle = round6(private - car);
                let public = 1.0 - car - motorcycle;
                rows.push(InitModeRow { ses, sex, age_band: band, car, motorcycle, public });
            }
        }
    }
    rows
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Validated lookup form of the initial-mode rows.
#[derive(Debug, Clone)]
pub struct InitModeTable {
    cells: [[[[f64; 3]; 3]; 2]; 3],
}

impl InitModeTable {
    pub fn from_rows(rows: &[InitModeRow]) -> Result<Self> {
        let mut cells = [[[None; 3]; 2]; 3];
        for (i, row) in rows.iter().enumerate() {
            check_probabilities(&format!("population.init_mode[{i}]"), &row.probs())?;
            let slot = &mut cells[row.ses.index()][row.sex.index()][row.age_band.index()];
            if slot.is_some() {
                return Err(Error::config(
                    format!("population.init_mode[{i}]"),
                    format!("duplicate row for ({}, {}, {:?})", row.ses, row.sex.label(), row.age_band),
                ));
            }
            *slot = Some(row.probs());
        }
        let mut out = [[[[0.0; 3]; 3]; 2]; 3];
        for ses in SocioEconomicGroup::ALL {
            for sex in Sex::ALL {
                for band in AgeBand::ALL {
                    out[ses.index()][sex.index()][band.index()] = cells[ses.index()][sex.index()][band.index()]
                        .ok_or_else(|| {
                            Error::config(
                                "population.init_mode",
                                format!("missing row for ({}, {}, {:?})", ses, sex.label(), band),
                            )
                        })?;
                }
            }
        }
        Ok(InitModeTable { cells: out })
    }

    pub fn probs(&self, ses: SocioEconomicGroup, sex: Sex, band: AgeBand) -> [f64; 3] {
        self.cells[ses.index()][sex.index()][band.index()]
    }
}

/// Demographic section of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemographicConfig {
    pub n_agents: usize,
    /// Shares of the low, middle and high socioeconomic groups.
    pub ses_shares: [f64; 3],
    /// Shares of women and men.
    pub sex_shares: [f64; 2],
    pub age: BoundedDist,
    /// Monthly income per group.
    pub income: PerSes<LogNormalSpec>,
    /// One-way commute distance, km.
    pub distance: BoundedDist,
    pub init_mode: Vec<InitModeRow>,
    pub weights: WeightTable,
    pub sat_threshold: BoundedDist,
    pub unc_threshold: BoundedDist,
    pub uncertainty_avoidance: BoundedDist,
    pub collectivism: BoundedDist,
}

impl Default for DemographicConfig {
    fn default() -> Self {
        DemographicConfig {
            n_agents: 2000,
            ses_shares: [0.35, 0.45, 0.20],
            sex_shares: [0.52, 0.48],
            age: BoundedDist::truncated_normal(38.0, 14.0, 16.0, 80.0),
            income: PerSes {
                low: LogNormalSpec { median: 1_600_000.0, sigma: 0.4 },
                mid: LogNormalSpec { median: 3_500_000.0, sigma: 0.4 },
                high: LogNormalSpec { median: 9_000_000.0, sigma: 0.4 },
            },
            distance: BoundedDist::truncated_normal(9.0, 5.0, 1.5, 30.0),
            init_mode: default_init_mode_rows(),
            weights: WeightTable::default(),
            sat_threshold: BoundedDist::truncated_normal(0.64, 0.1, 0.01, 0.99),
            unc_threshold: BoundedDist::truncated_normal(0.45, 0.1, 0.01, 0.99),
            uncertainty_avoidance: BoundedDist::truncated_normal(0.70, 0.1, 0.0, 1.0),
            collectivism: BoundedDist::truncated_normal(0.87, 0.1, 0.0, 1.0),
        }
    }
}

impl DemographicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 {
            return Err(Error::config("population.n_agents", "must be at least 1"));
        }
        check_probabilities("population.ses_shares", &self.ses_shares)?;
        check_probabilities("population.sex_shares", &self.sex_shares)?;
        self.age.validate("population.age")?;
        if self.age.bounds().0 < 16.0 {
            return Err(Error::config("population.age", "minimum age is 16"));
        }
        self.distance.validate("population.distance")?;
        if self.distance.bounds().0 <= 0.0 {
            return Err(Error::config("population.distance", "distances must be positive"));
        }
        for ses in SocioEconomicGroup::ALL {
            self.income.get(ses).validate(&format!("population.income.{ses}"))?;
        }
        InitModeTable::from_rows(&self.init_mode)?;
        self.weights.validate("population.weights")?;
        for (field, dist) in
            [("population.sat_threshold", &self.sat_threshold), ("population.unc_threshold", &self.unc_threshold)]
        {
            dist.validate(field)?;
            let (lo, hi) = dist.bounds();
            if lo <= 0.0 || hi >= 1.0 {
                return Err(Error::config(field, "threshold support must lie inside (0, 1)"));
            }
        }
        for (field, dist) in [
            ("population.uncertainty_avoidance", &self.uncertainty_avoidance),
            ("population.collectivism", &self.collectivism),
        ] {
            dist.validate(field)?;
            let (lo, hi) = dist.bounds();
            if lo < 0.0 || hi > 1.0 {
                return Err(Error::config(field, "support must lie inside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Draws one agent's importance weights: normal around the group means,
/// clamped to `[0, 1]`.
pub fn draw_weights<R: Rng + ?Sized>(
    ses: SocioEconomicGroup,
    table: &WeightTable,
    rng: &mut R,
) -> Result<AttributeVector> {
    let means = table.means.get(ses);
    let sds = table.sds.get(ses);
    let mut w = [0.0; N_ATTRIBUTES];
    for k in 0..N_ATTRIBUTES {
        let (mean, sd) = (means[k], sds[k]);
        if !(0.0..=1.0).contains(&mean) {
            return Err(Error::config(
                format!("population.weights.means.{ses}[{k}]"),
                format!("weight mean {mean} outside [0, 1]"),
            ));
        }
        w[k] = if sd == 0.0 {
            mean
        } else {
            let z: f64 = StandardNormal.sample(rng);
            (mean + sd * z).clamp(0.0, 1.0)
        };
    }
    Ok(w)
}

/// Draws the starting mode for `agent` from its (ses, sex, age band) row.
pub fn assign_initial_mode<R: Rng + ?Sized>(agent: &Agent, table: &InitModeTable, rng: &mut R) -> ModeId {
    let probs = table.probs(agent.ses, agent.sex, AgeBand::of(agent.age));
    ModeId::ALL[categorical(&probs, rng)]
}

/// Builds `cfg.n_agents` agents. Deterministic for a given generator state.
pub fn synthesize_population<R: Rng + ?Sized>(cfg: &DemographicConfig, rng: &mut R) -> Result<Vec<Agent>> {
    cfg.validate()?;
    let table = InitModeTable::from_rows(&cfg.init_mode)?;
    let mut agents = Vec::with_capacity(cfg.n_agents);
    for id in 0..cfg.n_agents {
        let ses = SocioEconomicGroup::ALL[categorical(&cfg.ses_shares, rng)];
        let sex = Sex::ALL[categorical(&cfg.sex_shares, rng)];
        let age = cfg.age.sample(rng).round() as u32;
        let income = cfg.income.get(ses).sample(rng);
        let commute_distance = cfg.distance.sample(rng);
        let weights = draw_weights(ses, &cfg.weights, rng)?;
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("population.weights", format!("agent {id} drew an all-zero weight vector")));
        }
        let mut agent = Agent {
            id,
            sex,
            age,
            ses,
            commute_distance,
            income,
            weights,
            sat_threshold: cfg.sat_threshold.sample(rng),
            unc_threshold: cfg.unc_threshold.sample(rng),
            uncertainty_avoidance: cfg.uncertainty_avoidance.sample(rng),
            collectivism: cfg.collectivism.sample(rng),
            current_mode: ModeId::PublicTransit,
            experience: [0.0; 3],
            owns: [false; 3],
        };
        let mode = assign_initial_mode(&agent, &table, rng);
        agent.current_mode = mode;
        agent.experience[mode.index()] = 1.0;
        agent.owns[mode.index()] = mode != ModeId::PublicTransit;
        agents.push(agent);
    }
    Ok(agents)
}

/// Fraction of agents on each mode, in [`ModeId`] order.
pub fn mode_shares(agents: &[Agent]) -> [f64; 3] {
    let mut counts = [0usize; 3];
    for a in agents {
        counts[a.current_mode.index()] += 1;
    }
    let n = agents.len().max(1) as f64;
    counts.map(|c| c as f64 / n)
}

/// Writes the population as CSV for auditing.
pub fn write_population_csv<W: Write>(agents: &[Agent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["id", "sex", "age", "ses", "income", "distance", "mode"].iter().map(|s| s.to_string()).collect();
    header.extend(AttributeId::ALL.iter().map(|a| format!("w_{}", a.short())));
    header.extend(["sat_thr", "unc_thr", "ua", "coll"].iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for a in agents {
        let mut rec = vec![
            a.id.to_string(),
            a.sex.label().to_string(),
            a.age.to_string(),
            a.ses.label().to_string(),
            a.income.to_string(),
            a.commute_distance.to_string(),
            a.current_mode.label().to_string(),
        ];
        rec.extend(a.weights.iter().map(|x| x.to_string()));
        rec.extend([a.sat_threshold, a.unc_threshold, a.uncertainty_avoidance, a.collectivism].map(|x| x.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Runtime(e.to_string()))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Runtime(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn ses_shares_converge() {
        let cfg = DemographicConfig { n_agents: 1000, ..Default::default() };
        let agents = synthesize_population(&cfg, &mut rng(11)).unwrap();
        assert_eq!(agents.len(), 1000);
        for ses in SocioEconomicGroup::ALL {
            let share = agents.iter().filter(|a| a.ses == ses).count() as f64 / 1000.0;
            assert!((share - cfg.ses_shares[ses.index()]).abs() <= 0.03, "{ses}: {share}");
        }
    }

    #[test]
    fn single_agent_is_within_bounds() {
        let cfg = DemographicConfig { n_agents: 1, ..Default::default() };
        let agents = synthesize_population(&cfg, &mut rng(5)).unwrap();
        assert_eq!(agents.len(), 1);
        let a = &agents[0];
        assert!(a.age >= 16 && a.age <= 80);
        assert!(a.commute_distance >= 1.5 && a.commute_distance <= 30.0);
        assert!(a.weights.iter().all(|w| (0.0..=1.0).contains(w)));
        assert!(a.sat_threshold > 0.0 && a.sat_threshold < 1.0);
        assert!(a.unc_threshold > 0.0 && a.unc_threshold < 1.0);
        assert!((0.0..=1.0).contains(&a.uncertainty_avoidance));
        assert!((0.0..=1.0).contains(&a.collectivism));
        assert!(a.experience.iter().all(|e| (0.0..=1.0).contains(e)));
    }

    #[test]
    fn same_seed_same_population() {
        let cfg = DemographicConfig { n_agents: 300, ..Default::default() };
        let a = synthesize_population(&cfg, &mut rng(77)).unwrap();
        let b = synthesize_population(&cfg, &mut rng(77)).unwrap();
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        write_population_csv(&a, &mut ba).unwrap();
        write_population_csv(&b, &mut bb).unwrap();
        assert_eq!(ba, bb);
        assert_eq!(a, b);
    }

    #[test]
    fn bad_shares_name_the_field() {
        let cfg = DemographicConfig { ses_shares: [0.5, 0.5, 0.5], ..Default::default() };
        let err = synthesize_population(&cfg, &mut rng(1)).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "population.ses_shares"));
    }

    #[test]
    fn zero_agents_rejected() {
        let cfg = DemographicConfig { n_agents: 0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
    }

    #[test]
    fn zero_sd_weights_equal_means() {
        let mut table = WeightTable::default();
        table.sds = PerSes { low: [0.0; 7], mid: [0.0; 7], high: [0.0; 7] };
        for ses in SocioEconomicGroup::ALL {
            let w = draw_weights(ses, &table, &mut rng(2)).unwrap();
            assert_eq!(&w, table.means.get(ses));
        }
    }

    #[test]
    fn weight_mean_out_of_range_is_config_error() {
        let mut table = WeightTable::default();
        table.means.low[3] = 1.2;
        assert!(matches!(draw_weights(SocioEconomicGroup::Low, &table, &mut rng(2)), Err(Error::Config { .. })));
    }

    fn ranked(means: &AttributeVector) -> Vec<AttributeId> {
        let mut ids = AttributeId::ALL.to_vec();
        ids.sort_by(|a, b| means[b.index()].partial_cmp(&means[a.index()]).unwrap());
        ids
    }

    fn sampled_means(ses: SocioEconomicGroup, n: usize) -> AttributeVector {
        let table = WeightTable::default();
        let mut r = rng(123);
        let mut acc = [0.0; 7];
        for _ in 0..n {
            let w = draw_weights(ses, &table, &mut r).unwrap();
            for k in 0..7 {
                acc[k] += w[k];
            }
        }
        acc.map(|x| x / n as f64)
    }

    #[test]
    fn low_income_weight_ranking_is_reproduced() {
        let ranks = ranked(&sampled_means(SocioEconomicGroup::Low, 10_000));
        assert_eq!(&ranks[..3], &[AttributeId::AcquisitionCost, AttributeId::TravelTime, AttributeId::OperatingCost]);
        assert_eq!(ranks[6], AttributeId::Emissions);
        assert_eq!(ranks[5], AttributeId::PersonalSecurity);
    }

    #[test]
    fn mid_income_weight_ranking_is_reproduced() {
        let ranks = ranked(&sampled_means(SocioEconomicGroup::Mid, 10_000));
        assert_eq!(&ranks[..3], &[AttributeId::TravelTime, AttributeId::Comfort, AttributeId::PersonalSecurity]);
        assert_eq!(ranks[6], AttributeId::Emissions);
    }

    #[test]
    fn degenerate_row_always_picks_car() {
        let mut rows = default_init_mode_rows();
        for r in rows.iter_mut() {
            r.car = 1.0;
            r.motorcycle = 0.0;
            r.public = 0.0;
        }
        let table = InitModeTable::from_rows(&rows).unwrap();
        let cfg = DemographicConfig { n_agents: 200, init_mode: rows, ..Default::default() };
        let agents = synthesize_population(&cfg, &mut rng(4)).unwrap();
        assert!(agents.iter().all(|a| a.current_mode == ModeId::Car));
        let mut r = rng(8);
        for a in &agents {
            assert_eq!(assign_initial_mode(a, &table, &mut r), ModeId::Car);
        }
    }

    #[test]
    fn missing_table_row_is_config_error() {
        let mut rows = default_init_mode_rows();
        rows.pop();
        let err = InitModeTable::from_rows(&rows).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "population.init_mode"));
    }

    #[test]
    fn default_rows_are_monotone() {
        let table = InitModeTable::from_rows(&default_init_mode_rows()).unwrap();
        let private = |p: [f64; 3]| p[0] + p[1];
        for band in AgeBand::ALL {
            for sex in Sex::ALL {
                let l = private(table.probs(SocioEconomicGroup::Low, sex, band));
                let m = private(table.probs(SocioEconomicGroup::Mid, sex, band));
                let h = private(table.probs(SocioEconomicGroup::High, sex, band));
                assert!(l <= m && m <= h);
            }
            for ses in SocioEconomicGroup::ALL {
                assert!(private(table.probs(ses, Sex::M, band)) > private(table.probs(ses, Sex::F, band)));
            }
        }
    }

    #[test]
    fn initial_shares_sum_to_one() {
        let cfg = DemographicConfig { n_agents: 5000, ..Default::default() };
        let agents = synthesize_population(&cfg, &mut rng(31)).unwrap();
        let s = mode_shares(&agents);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
