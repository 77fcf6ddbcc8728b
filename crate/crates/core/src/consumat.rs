//! The cognitive engine: satisfaction, uncertainty, strategy dispatch and
//! the four decision strategies (repeat, imitate, inquire, deliberate).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Agent, AttributeVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeId {
    Car,
    Motorcycle,
    #[serde(alias = "public")]
    PublicTransit,
}

impl ModeId {
    pub const ALL: [ModeId; 3] = [ModeId::Car, ModeId::Motorcycle, ModeId::PublicTransit];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeId::Car => "car",
            ModeId::Motorcycle => "motorcycle",
            ModeId::PublicTransit => "public",
        }
    }

    /// Three-letter legend label (`car`, `mot`, `pub`).
    pub fn short(self) -> &'static str {
        match self {
            ModeId::Car => "car",
            ModeId::Motorcycle => "mot",
            ModeId::PublicTransit => "pub",
        }
    }

    pub fn is_private(self) -> bool {
        self != ModeId::PublicTransit
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "car" | "private_car" => Some(ModeId::Car),
            "motorcycle" | "moto" | "mot" => Some(ModeId::Motorcycle),
            "public" | "pub" | "public_transit" | "bus" | "transit" => Some(ModeId::PublicTransit),
            _ => None,
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    Repeat,
    Imitate,
    Inquire,
    Deliberate,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] =
        [StrategyKind::Repeat, StrategyKind::Imitate, StrategyKind::Inquire, StrategyKind::Deliberate];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsumatConfig {
    /// Weight on past experience when smoothing (λ).
    pub experience_smoothing: f64,
    /// A car is affordable when its price is at most this multiple of annual income.
    pub car_affordability: f64,
    pub motorcycle_affordability: f64,
}

impl Default for ConsumatConfig {
    fn default() -> Self {
        ConsumatConfig { experience_smoothing: 0.8, car_affordability: 0.5, motorcycle_affordability: 0.15 }
    }
}

impl ConsumatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.experience_smoothing) {
            return Err(Error::config("consumat.experience_smoothing", "must lie in [0, 1]"));
        }
        for (field, k) in [
            ("consumat.car_affordability", self.car_affordability),
            ("consumat.motorcycle_affordability", self.motorcycle_affordability),
        ] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::config(field, "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// Weighted satisfaction rescaled by the weight sum, so the result stays in `[0, 1]`.
pub fn compute_satisfaction(weights: &AttributeVector, x: &AttributeVector) -> f64 {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "weight vectors are checked non-zero at population build time");
    let dot: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
    (dot / total).clamp(0.0, 1.0)
}

/// Maps an agent's traits and the social evidence about a mode to an uncertainty level.
pub trait UncertaintyModel: Send + Sync + fmt::Debug {
    fn uncertainty(&self, avoidance: f64, collectivism: f64, experience: f64, peer_share: f64) -> f64;
}

/// `U = ua * (coll * (1 - peer_share) + (1 - coll) * (1 - experience))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConvexUncertainty;

impl UncertaintyModel for ConvexUncertainty {
    fn uncertainty(&self, avoidance: f64, collectivism: f64, experience: f64, peer_share: f64) -> f64 {
        let social = 1.0 - peer_share;
        let personal = 1.0 - experience;
        (avoidance * (collectivism * social + (1.0 - collectivism) * personal)).clamp(0.0, 1.0)
    }
}

/// Uncertainty of `agent` about `mode` when `peer_share` of its neighbours use it.
pub fn compute_uncertainty(agent: &Agent, mode: ModeId, peer_share: f64) -> f64 {
    ConvexUncertainty.uncertainty(
        agent.uncertainty_avoidance,
        agent.collectivism,
        agent.experience[mode.index()],
        peer_share,
    )
}

/// Quadrant dispatch; thresholds are met at equality.
pub fn select_strategy(s: f64, s_star: f64, u: f64, u_star: f64) -> StrategyKind {
    let satisfied = s >= s_star;
    let certain = u <= u_star;
    match (satisfied, certain) {
        (true, true) => StrategyKind::Repeat,
        (true, false) => StrategyKind::Imitate,
        (false, true) => StrategyKind::Deliberate,
        (false, false) => StrategyKind::Inquire,
    }
}

/// Which modes an agent can use next period: public transit always, a
/// private vehicle if already owned or affordable at its current price.
pub fn availability(agent: &Agent, prices: [f64; 3], cfg: &ConsumatConfig) -> [bool; 3] {
    let annual = agent.annual_income();
    let car = agent.owns[ModeId::Car.index()] || prices[ModeId::Car.index()] <= cfg.car_affordability * annual;
    let moto = agent.owns[ModeId::Motorcycle.index()]
        || prices[ModeId::Motorcycle.index()] <= cfg.motorcycle_affordability * annual;
    [car, moto, true]
}

/// What an agent sees when it makes a decision.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext {
    pub current: ModeId,
    /// How many neighbours used each mode last period.
    pub neighbor_counts: [usize; 3],
    /// Satisfaction the agent expects from each mode.
    pub satisfaction: [f64; 3],
    pub available: [bool; 3],
}

pub fn decide_mode<R: Rng + ?Sized>(strategy: StrategyKind, ctx: &DecisionContext, rng: &mut R) -> ModeId {
    let current = ctx.current;
    match strategy {
        StrategyKind::Repeat => current,
        StrategyKind::Imitate => {
            let best = ModeId::ALL
                .iter()
                .filter(|m| ctx.available[m.index()])
                .map(|m| ctx.neighbor_counts[m.index()])
                .max()
                .unwrap_or(0);
            if best == 0 {
                return current;
            }
            let tied: Vec<ModeId> = ModeId::ALL
                .into_iter()
                .filter(|m| ctx.available[m.index()] && ctx.neighbor_counts[m.index()] == best)
                .collect();
            if tied.contains(&current) {
                current
            } else if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.random_range(0..tied.len())]
            }
        }
        StrategyKind::Inquire => {
            let own = ctx.satisfaction[current.index()];
            let mut best: Option<(ModeId, f64)> = None;
            for m in ModeId::ALL {
                if m == current || !ctx.available[m.index()] || ctx.neighbor_counts[m.index()] == 0 {
                    continue;
                }
                let s = ctx.satisfaction[m.index()];
                if best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((m, s));
                }
            }
            match best {
                Some((m, s)) if s > own => m,
                _ => current,
            }
        }
        StrategyKind::Deliberate => {
            let mut best = (current, ctx.satisfaction[current.index()]);
            for m in ModeId::ALL {
                if ctx.available[m.index()] && ctx.satisfaction[m.index()] > best.1 {
                    best = (m, ctx.satisfaction[m.index()]);
                }
            }
            best.0
        }
    }
}

/// Exponential smoothing of familiarity towards the mode actually used.
pub fn update_experience(experience: &mut [f64; 3], mode_used: ModeId, smoothing: f64) {
    for m in ModeId::ALL {
        let hit = if m == mode_used { 1.0 } else { 0.0 };
        let e = &mut experience[m.index()];
        *e = (smoothing * *e + (1.0 - smoothing) * hit).clamp(0.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn satisfaction_examples() {
        let w = [0.3, 0.9, 0.2, 0.5, 0.4, 0.7, 0.1];
        assert!((compute_satisfaction(&w, &[0.7; 7]) - 0.7).abs() < 1e-12);
        let w2 = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let x = [0.4, 0.8, 0.1, 0.9, 0.3, 0.2, 0.5];
        assert!((compute_satisfaction(&w2, &x) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_examples() {
        let u = ConvexUncertainty;
        assert_eq!(u.uncertainty(0.0, 0.7, 0.1, 0.3), 0.0);
        assert_eq!(u.uncertainty(1.0, 1.0, 0.0, 1.0), 0.0);
        // 0.5 * (1 - 0.2) + 0.5 * (1 - 0.6)
        let hand = 0.5 * 0.8 + 0.5 * 0.4;
        assert!((u.uncertainty(1.0, 0.5, 0.6, 0.2) - hand).abs() < 1e-12);
        assert!((hand - 0.6).abs() < 1e-12);
    }

    #[test]
    fn strategy_quadrants() {
        assert_eq!(select_strategy(0.8, 0.6, 0.2, 0.4), StrategyKind::Repeat);
        assert_eq!(select_strategy(0.8, 0.6, 0.5, 0.4), StrategyKind::Imitate);
        assert_eq!(select_strategy(0.4, 0.6, 0.2, 0.4), StrategyKind::Deliberate);
        assert_eq!(select_strategy(0.4, 0.6, 0.5, 0.4), StrategyKind::Inquire);
        assert_eq!(select_strategy(0.5, 0.5, 0.3, 0.3), StrategyKind::Repeat);
    }

    fn ctx(current: ModeId, counts: [usize; 3], sat: [f64; 3], avail: [bool; 3]) -> DecisionContext {
        DecisionContext { current, neighbor_counts: counts, satisfaction: sat, available: avail }
    }

    #[test]
    fn repeat_keeps_mode() {
        let c = ctx(ModeId::Motorcycle, [5, 0, 5], [0.9, 0.1, 0.9], [true; 3]);
        assert_eq!(decide_mode(StrategyKind::Repeat, &c, &mut rng()), ModeId::Motorcycle);
    }

    #[test]
    fn imitate_follows_plurality() {
        let c = ctx(ModeId::Motorcycle, [1, 0, 2], [0.5; 3], [true; 3]);
        assert_eq!(decide_mode(StrategyKind::Imitate, &c, &mut rng()), ModeId::PublicTransit);
    }

    #[test]
    fn imitate_respects_availability_and_ties() {
        let c = ctx(ModeId::PublicTransit, [4, 1, 1], [0.5; 3], [false, true, true]);
        // car is most common but unaffordable; moto and public tie and public is current
        assert_eq!(decide_mode(StrategyKind::Imitate, &c, &mut rng()), ModeId::PublicTransit);
        let c = ctx(ModeId::PublicTransit, [2, 2, 1], [0.5; 3], [true; 3]);
        let mut r = rng();
        let picks: Vec<ModeId> = (0..200).map(|_| decide_mode(StrategyKind::Imitate, &c, &mut r)).collect();
        assert!(picks.contains(&ModeId::Car) && picks.contains(&ModeId::Motorcycle));
        assert!(!picks.contains(&ModeId::PublicTransit));
    }

    #[test]
    fn inquire_requires_strict_improvement_among_neighbour_modes() {
        // current moto S=0.5, neighbours use car (0.7) and public (0.4)
        let c = ctx(ModeId::Motorcycle, [1, 0, 3], [0.7, 0.5, 0.4], [true; 3]);
        let chosen = decide_mode(StrategyKind::Inquire, &c, &mut rng());
        // brute-force oracle: best neighbour-used available mode, switch only if strictly better
        let oracle = ModeId::ALL
            .into_iter()
            .filter(|m| c.neighbor_counts[m.index()] > 0 && c.available[m.index()])
            .max_by(|a, b| c.satisfaction[a.index()].total_cmp(&c.satisfaction[b.index()]))
            .filter(|m| c.satisfaction[m.index()] > c.satisfaction[c.current.index()])
            .unwrap_or(c.current);
        assert_eq!(chosen, ModeId::Car);
        assert_eq!(chosen, oracle);

        let tie = ctx(ModeId::Motorcycle, [1, 0, 0], [0.5, 0.5, 0.9], [true; 3]);
        assert_eq!(decide_mode(StrategyKind::Inquire, &tie, &mut rng()), ModeId::Motorcycle);
    }

    #[test]
    fn deliberate_maximises_over_available() {
        let c = ctx(ModeId::PublicTransit, [0, 0, 3], [0.9, 0.6, 0.5], [false, true, true]);
        assert_eq!(decide_mode(StrategyKind::Deliberate, &c, &mut rng()), ModeId::Motorcycle);
        let tie = ctx(ModeId::PublicTransit, [0, 0, 3], [0.6, 0.6, 0.6], [true; 3]);
        assert_eq!(decide_mode(StrategyKind::Deliberate, &tie, &mut rng()), ModeId::PublicTransit);
    }

    #[test]
    fn experience_smoothing() {
        let mut e = [0.0; 3];
        update_experience(&mut e, ModeId::Car, 0.8);
        assert!((e[0] - 0.2).abs() < 1e-12 && e[1] == 0.0 && e[2] == 0.0);
        for _ in 0..200 {
            update_experience(&mut e, ModeId::Car, 0.8);
        }
        assert!((1.0 - e[0]).abs() < 1e-12);
        let mut e = [0.0, 1.0, 0.5];
        for _ in 0..200 {
            update_experience(&mut e, ModeId::Car, 0.8);
        }
        assert!(e[1] < 1e-12 && e[2] < 1e-12);
    }

    fn unit() -> impl Strategy<Value = f64> {
        0.0..=1.0f64
    }

    fn vec7() -> impl Strategy<Value = AttributeVector> {
        proptest::array::uniform7(unit())
    }

    proptest! {
        #[test]
        fn satisfaction_in_unit_interval_and_scale_free(w in vec7(), x in vec7(), c in 0.01..100.0f64) {
            prop_assume!(w.iter().sum::<f64>() > 1e-6);
            let s = compute_satisfaction(&w, &x);
            prop_assert!((0.0..=1.0).contains(&s));
            let scaled = w.map(|v| v * c);
            prop_assert!((compute_satisfaction(&scaled, &x) - s).abs() < 1e-9);
        }

        #[test]
        fn uncertainty_is_monotone(ua in unit(), coll in unit(), e in unit(), p in unit(), d in 0.0..0.5f64) {
            let m = ConvexUncertainty;
            let u = m.uncertainty(ua, coll, e, p);
            prop_assert!((0.0..=1.0).contains(&u));
            prop_assert!(m.uncertainty(ua, coll, e, (p + d).min(1.0)) <= u + 1e-12);
            prop_assert!(m.uncertainty(ua, coll, (e + d).min(1.0), p) <= u + 1e-12);
            let base = m.uncertainty(1.0, coll, e, p);
            prop_assert!((u - ua * base).abs() < 1e-12);
        }

        #[test]
        fn decisions_stay_available(
            cur in 0usize..3,
            counts in proptest::array::uniform3(0usize..5),
            sat in proptest::array::uniform3(unit()),
            car in any::<bool>(),
            moto in any::<bool>(),
            strategy in 0usize..4,
            seed in any::<u64>(),
        ) {
            let mut avail = [car, moto, true];
            avail[cur] = true;
            let c = ctx(ModeId::ALL[cur], counts, sat, avail);
            let s = StrategyKind::ALL[strategy];
            let chosen = decide_mode(s, &c, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(avail[chosen.index()]);
            if s == StrategyKind::Repeat {
                prop_assert_eq!(chosen, c.current);
            }
        }

        #[test]
        fn experience_stays_in_range(e in proptest::array::uniform3(unit()), m in 0usize..3, l in unit()) {
            let mut e = e;
            update_experience(&mut e, ModeId::ALL[m], l);
            prop_assert!(e.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
