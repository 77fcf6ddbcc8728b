//! Public-transit interventions and their combinations.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::environment::ModeState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Multiplies the public fare.
    FareFree,
    /// Multiplies the public headway.
    #[serde(alias = "frequency")]
    FrequencyBoost,
    /// Adds to the public personal-security score.
    #[serde(alias = "security")]
    SecurityImprovement,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] =
        [PolicyKind::FareFree, PolicyKind::FrequencyBoost, PolicyKind::SecurityImprovement];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::FareFree => "fare_free",
            PolicyKind::FrequencyBoost => "frequency",
            PolicyKind::SecurityImprovement => "security",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fare_free" | "farefree" | "fare" | "cost" => Some(PolicyKind::FareFree),
            "frequency" | "frequency_boost" | "headway" => Some(PolicyKind::FrequencyBoost),
            "security" | "security_improvement" => Some(PolicyKind::SecurityImprovement),
            _ => None,
        }
    }

    pub fn default_magnitude(self) -> f64 {
        match self {
            PolicyKind::FareFree => 0.0,
            PolicyKind::FrequencyBoost => 0.5,
            PolicyKind::SecurityImprovement => 0.2,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyIntervention {
    pub kind: PolicyKind,
    pub magnitude: f64,
    /// First simulated year in which the policy is in force.
    #[serde(default)]
    pub start_year: u32,
}

impl PolicyIntervention {
    pub fn new(kind: PolicyKind) -> Self {
        PolicyIntervention { kind, magnitude: kind.default_magnitude(), start_year: 0 }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let m = self.magnitude;
        let ok = match self.kind {
            PolicyKind::FareFree => m.is_finite() && m >= 0.0,
            PolicyKind::FrequencyBoost => m.is_finite() && m > 0.0,
            PolicyKind::SecurityImprovement => m.is_finite() && (-1.0..=1.0).contains(&m),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("{field}.magnitude"), format!("{m} is not a legal magnitude for {}", self.kind)))
        }
    }

    pub fn active_in(&self, year: u32) -> bool {
        year >= self.start_year
    }
}

pub fn validate_policies(policies: &[PolicyIntervention]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, p) in policies.iter().enumerate() {
        p.validate(&format!("policies[{i}]"))?;
        if !seen.insert(p.kind) {
            return Err(Error::config(format!("policies[{i}]"), format!("{} listed more than once", p.kind)));
        }
    }
    Ok(())
}

/// Applies `active` to `base`. Each kind touches a different public-transit
/// field, so the result does not depend on the order of `active`.
pub fn apply_policies(base: &ModeState, active: &[PolicyIntervention]) -> Result<ModeState> {
    validate_policies(active)?;
    let mut out = base.clone();
    for p in active {
        let public = &mut out.public;
        match p.kind {
            PolicyKind::FareFree => public.cost_per_km = (public.cost_per_km * p.magnitude).max(0.0),
            PolicyKind::FrequencyBoost => public.headway = (public.headway * p.magnitude).max(0.0),
            PolicyKind::SecurityImprovement => public.security = (public.security + p.magnitude).clamp(0.0, 1.0),
        }
    }
    Ok(out)
}

/// One member of a policy sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyScenario {
    pub name: String,
    pub policies: Vec<PolicyIntervention>,
}

/// Name of a policy set: `base` for the empty set, otherwise kinds joined by `+`.
pub fn set_name(kinds: &[PolicyKind]) -> String {
    if kinds.is_empty() {
        "base".to_string()
    } else {
        kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join("+")
    }
}

/// Parses a set specification such as `base,singles,fare_free+security,triple`.
///
/// Keywords: `base`, `singles`, `pairs`, `triple`, `all` (every subset).
/// Explicit sets join kinds with `+`. Duplicates are dropped, first occurrence wins.
pub fn parse_set_spec(spec: &str) -> Result<Vec<Vec<PolicyKind>>> {
    let mut sets: Vec<Vec<PolicyKind>> = Vec::new();
    let push = |set: Vec<PolicyKind>, sets: &mut Vec<Vec<PolicyKind>>| {
        if !sets.contains(&set) {
            sets.push(set);
        }
    };
    let [a, b, c] = PolicyKind::ALL;
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "base" | "none" => push(vec![], &mut sets),
            "singles" => PolicyKind::ALL.iter().for_each(|&k| push(vec![k], &mut sets)),
            "pairs" => {
                for pair in [vec![a, b], vec![a, c], vec![b, c]] {
                    push(pair, &mut sets);
                }
            }
            "triple" => push(vec![a, b, c], &mut sets),
            "all" => {
                for set in [vec![], vec![a], vec![b], vec![c], vec![a, b], vec![a, c], vec![b, c], vec![a, b, c]] {
                    push(set, &mut sets);
                }
            }
            explicit => {
                let mut kinds = BTreeSet::new();
                for part in explicit.split('+') {
                    let kind = PolicyKind::parse(part)
                        .ok_or_else(|| Error::config("--policies", format!("unknown policy `{part}`")))?;
                    kinds.insert(kind);
                }
                push(kinds.into_iter().collect(), &mut sets);
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::config("--policies", "empty policy set specification"));
    }
    Ok(sets)
}

/// Expands the requested subsets into independent scenarios. Magnitudes and
/// start years come from `catalog` when it defines the kind, else the defaults.
pub fn combine(requested: &[Vec<PolicyKind>], catalog: &[PolicyIntervention]) -> Vec<PolicyScenario> {
    requested
        .iter()
        .map(|set| {
            let mut kinds = set.clone();
            kinds.sort();
            kinds.dedup();
            let policies = kinds
                .iter()
                .map(|&k| catalog.iter().find(|p| p.kind == k).copied().unwrap_or_else(|| PolicyIntervention::new(k)))
                .collect();
            PolicyScenario { name: set_name(&kinds), policies }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consumat::ModeId;
    use crate::environment::{attribute_satisfaction, EnvironmentConfig};
    use crate::population::{synthesize_population, AttributeId, DemographicConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fare_free_zeroes_fare_and_cost_satisfaction() {
        let mut base = ModeState::default();
        base.public.cost_per_km = 2.0;
        let out = apply_policies(&base, &[PolicyIntervention::new(PolicyKind::FareFree)]).unwrap();
        assert_eq!(out.public.cost_per_km, 0.0);
        let env = EnvironmentConfig::default();
        let cfg = DemographicConfig { n_agents: 50, ..Default::default() };
        let agents = synthesize_population(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for a in &agents {
            let x = attribute_satisfaction(a, ModeId::PublicTransit, &out, 40.0, &env);
            assert_eq!(x[AttributeId::OperatingCost.index()], 1.0);
        }
    }

    #[test]
    fn frequency_boost_halves_headway() {
        let mut base = ModeState::default();
        base.public.headway = 12.0;
        let out = apply_policies(&base, &[PolicyIntervention::new(PolicyKind::FrequencyBoost)]).unwrap();
        assert_eq!(out.public.headway, 6.0);
        assert_eq!(base.public.headway / 2.0, 6.0);
        assert_eq!(out.public.headway / 2.0, 3.0);
    }

    #[test]
    fn security_is_clamped() {
        let mut base = ModeState::default();
        base.public.security = 0.9;
        let out = apply_policies(&base, &[PolicyIntervention::new(PolicyKind::SecurityImprovement)]).unwrap();
        assert_eq!(out.public.security, 1.0);
    }

    #[test]
    fn order_independent_idempotent_and_private_untouched() {
        let base = ModeState::default();
        let all: Vec<_> = PolicyKind::ALL.iter().map(|&k| PolicyIntervention::new(k)).collect();
        let mut rev = all.clone();
        rev.reverse();
        let a = apply_policies(&base, &all).unwrap();
        let b = apply_policies(&base, &rev).unwrap();
        assert_eq!(a, b);
        assert_eq!(apply_policies(&base, &all).unwrap(), a);
        assert_eq!(a.car, base.car);
        assert_eq!(a.motorcycle, base.motorcycle);
    }

    #[test]
    fn illegal_magnitudes_rejected() {
        let base = ModeState::default();
        let bad = PolicyIntervention { kind: PolicyKind::FrequencyBoost, magnitude: 0.0, start_year: 0 };
        assert!(matches!(apply_policies(&base, &[bad]), Err(Error::Config { .. })));
        let bad = PolicyIntervention { kind: PolicyKind::FareFree, magnitude: -1.0, start_year: 0 };
        assert!(matches!(apply_policies(&base, &[bad]), Err(Error::Config { .. })));
        let dup = [PolicyIntervention::new(PolicyKind::FareFree), PolicyIntervention::new(PolicyKind::FareFree)];
        assert!(apply_policies(&base, &dup).is_err());
    }

    #[test]
    fn combine_sets() {
        let sets = parse_set_spec("fare_free+security").unwrap();
        let scenarios = combine(&sets, &[]);
        assert_eq!(scenarios.len(), 1);
        assert_eq!(scenarios[0].name, "fare_free+security");
        let kinds: Vec<_> = scenarios[0].policies.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![PolicyKind::FareFree, PolicyKind::SecurityImprovement]);

        let base = combine(&parse_set_spec("base").unwrap(), &[]);
        assert_eq!(base[0].name, "base");
        assert!(base[0].policies.is_empty());

        let triple = combine(&parse_set_spec("triple").unwrap(), &[]);
        assert_eq!(triple[0].policies.len(), 3);
        let state = apply_policies(&ModeState::default(), &triple[0].policies).unwrap();
        let d = ModeState::default();
        assert_eq!(state.public.cost_per_km, 0.0);
        assert_eq!(state.public.headway, d.public.headway * 0.5);
        assert!((state.public.security - (d.public.security + 0.2)).abs() < 1e-12);

        assert_eq!(parse_set_spec("all").unwrap().len(), 8);
        assert_eq!(parse_set_spec("singles,pairs,fare_free").unwrap().len(), 6);
        assert!(parse_set_spec("teleport").is_err());
    }

    #[test]
    fn catalog_overrides_magnitude() {
        let catalog = [PolicyIntervention { kind: PolicyKind::SecurityImprovement, magnitude: 0.35, start_year: 2 }];
        let s = combine(&[vec![PolicyKind::SecurityImprovement]], &catalog);
        assert_eq!(s[0].policies[0], catalog[0]);
    }
}
