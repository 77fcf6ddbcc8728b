//! The city: congestion-dependent travel times, attribute satisfaction,
//! system indicators and the period loop.
//!
//! A period is one commute year of `ticks_per_period` ticks. During the
//! ticks every agent commutes on its current mode and accumulates the
//! travel times it experiences; at the end of the period all agents decide
//! simultaneously, each looking only at the state of the period just lived.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::consumat::{
    availability, compute_satisfaction, decide_mode, select_strategy, update_experience, ConsumatConfig,
    ConvexUncertainty, DecisionContext, ModeId, UncertaintyModel,
};
use crate::error::{Error, Result};
use crate::network::SocialGraph;
use crate::policy::{apply_policies, PolicyIntervention};
use crate::population::{mode_shares, Agent, AttributeId, AttributeVector, N_ATTRIBUTES};

/// Supply-side description of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeParams {
    /// Fare (public) or operating cost (private), currency per km.
    pub cost_per_km: f64,
    /// Purchase price; zero for public transit.
    pub acquisition_price: f64,
    /// Free-flow speed, km/h.
    pub base_speed: f64,
    /// Minutes between departures; zero for private modes.
    #[serde(default)]
    pub headway: f64,
    pub comfort: f64,
    pub security: f64,
    /// Accidents per 100 million km.
    pub safety_risk: f64,
    /// Grams of CO2 per vehicle-km.
    pub emissions_gpkm: f64,
    /// Multiplier on the congestion delay term (lane filtering for motorcycles).
    #[serde(default = "one")]
    pub congestion_sensitivity: f64,
}

fn one() -> f64 {
    1.0
}

impl ModeParams {
    fn validate(&self, field: &str) -> Result<()> {
        let non_negative = [
            ("cost_per_km", self.cost_per_km),
            ("acquisition_price", self.acquisition_price),
            ("headway", self.headway),
            ("safety_risk", self.safety_risk),
            ("emissions_gpkm", self.emissions_gpkm),
            ("congestion_sensitivity", self.congestion_sensitivity),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{field}.{name}"), "must be finite and non-negative"));
            }
        }
        if !(self.base_speed.is_finite() && self.base_speed > 0.0) {
            return Err(Error::config(format!("{field}.base_speed"), "must be positive"));
        }
        for (name, v) in [("comfort", self.comfort), ("security", self.security)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{field}.{name}"), "score must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Per-mode supply state as shaped by the active policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeState {
    pub car: ModeParams,
    pub motorcycle: ModeParams,
    pub public: ModeParams,
}

impl Default for ModeState {
    fn default() -> Self {
        ModeState {
            car: ModeParams {
                cost_per_km: 600.0,
                acquisition_price: 15_000_000.0,
                base_speed: 30.0,
                headway: 0.0,
                comfort: 0.85,
                security: 0.80,
                safety_risk: 1.0,
                emissions_gpkm: 192.0,
                congestion_sensitivity: 1.0,
            },
            motorcycle: ModeParams {
                cost_per_km: 100.0,
                acquisition_price: 2_000_000.0,
                base_speed: 35.0,
                headway: 0.0,
                comfort: 0.40,
                security: 0.45,
                safety_risk: 6.5,
                emissions_gpkm: 103.0,
                congestion_sensitivity: 0.5,
            },
            public: ModeParams {
                // Flat fare spread over a typical trip length.
                cost_per_km: 270.0,
                acquisition_price: 0.0,
                base_speed: 17.0,
                // Effective headway, access and transfers included.
                headway: 60.0,
                comfort: 0.15,
                security: 0.15,
                safety_risk: 0.3,
                emissions_gpkm: 80.0,
                congestion_sensitivity: 1.0,
            },
        }
    }
}

impl ModeState {
    pub fn get(&self, mode: ModeId) -> &ModeParams {
        match mode {
            ModeId::Car => &self.car,
            ModeId::Motorcycle => &self.motorcycle,
            ModeId::PublicTransit => &self.public,
        }
    }

    pub fn prices(&self) -> [f64; 3] {
        ModeId::ALL.map(|m| self.get(m).acquisition_price)
    }

    pub fn validate(&self) -> Result<()> {
        self.car.validate("modes.car")?;
        self.motorcycle.validate("modes.motorcycle")?;
        self.public.validate("modes.public")?;
        if self.public.acquisition_price != 0.0 {
            return Err(Error::config("modes.public.acquisition_price", "public transit has no purchase price"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    /// BPR scale α.
    pub bpr_alpha: f64,
    /// BPR exponent β.
    pub bpr_beta: f64,
    /// Road capacity in vehicle units per agent.
    pub capacity_per_agent: f64,
    /// Road space of one motorcycle relative to a car.
    pub motorcycle_pce: f64,
    pub ticks_per_period: u32,
    pub trips_per_year: f64,
    /// Log-scale sd of the per-tick travel-time disturbance.
    pub time_noise_sd: f64,
    pub time_min: f64,
    pub time_max: f64,
    /// Share of monthly income at which operating-cost satisfaction reaches zero (φ).
    pub opcost_income_share: f64,
    /// Multiple of annual income at which acquisition-cost satisfaction reaches zero (ψ).
    pub price_income_multiple: f64,
    pub risk_max: f64,
    pub gpkm_max: f64,
    /// Passengers sharing one public vehicle's emissions.
    pub bus_occupancy: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            bpr_alpha: 0.15,
            bpr_beta: 4.0,
            capacity_per_agent: 0.6,
            motorcycle_pce: 0.3,
            ticks_per_period: 30,
            trips_per_year: 500.0,
            time_noise_sd: 0.1,
            time_min: 10.0,
            time_max: 120.0,
            opcost_income_share: 0.3,
            price_income_multiple: 1.0,
            risk_max: 10.0,
            gpkm_max: 250.0,
            bus_occupancy: 40.0,
        }
    }
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("environment.capacity_per_agent", self.capacity_per_agent),
            ("environment.trips_per_year", self.trips_per_year),
            ("environment.opcost_income_share", self.opcost_income_share),
            ("environment.price_income_multiple", self.price_income_multiple),
            ("environment.risk_max", self.risk_max),
            ("environment.gpkm_max", self.gpkm_max),
            ("environment.bus_occupancy", self.bus_occupancy),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        let non_negative = [
            ("environment.bpr_alpha", self.bpr_alpha),
            ("environment.bpr_beta", self.bpr_beta),
            ("environment.motorcycle_pce", self.motorcycle_pce),
            ("environment.time_noise_sd", self.time_noise_sd),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, "must be finite and non-negative"));
            }
        }
        if self.ticks_per_period == 0 {
            return Err(Error::config("environment.ticks_per_period", "must be at least 1"));
        }
        if !(self.time_min >= 0.0 && self.time_max > self.time_min) {
            return Err(Error::config("environment.time_max", "need 0 <= time_min < time_max"));
        }
        Ok(())
    }
}

/// Door-to-door minutes for a trip of `distance` km on `mode` when the road
/// carries `volume` vehicle units against `capacity`.
pub fn congested_travel_time(
    mode: ModeId,
    distance: f64,
    volume: f64,
    capacity: f64,
    params: &ModeParams,
    env: &EnvironmentConfig,
) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::config("environment.capacity_per_agent", "road capacity must be positive"));
    }
    Ok(travel_time_unchecked(mode, distance, volume / capacity, params, env))
}

fn travel_time_unchecked(mode: ModeId, distance: f64, ratio: f64, params: &ModeParams, env: &EnvironmentConfig) -> f64 {
    let delay = params.congestion_sensitivity * env.bpr_alpha * ratio.max(0.0).powf(env.bpr_beta);
    let speed = params.base_speed / (1.0 + delay);
    let in_vehicle = 60.0 * distance / speed;
    let wait = if mode == ModeId::PublicTransit { params.headway / 2.0 } else { 0.0 };
    in_vehicle + wait
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Emission factor per passenger-km.
pub fn passenger_gpkm(mode: ModeId, params: &ModeParams, env: &EnvironmentConfig) -> f64 {
    if mode == ModeId::PublicTransit {
        params.emissions_gpkm / env.bus_occupancy
    } else {
        params.emissions_gpkm
    }
}

/// Satisfaction of `agent` with each attribute of `mode` for a trip lasting `minutes`.
pub fn attribute_satisfaction(
    agent: &Agent,
    mode: ModeId,
    modes: &ModeState,
    minutes: f64,
    env: &EnvironmentConfig,
) -> AttributeVector {
    let p = modes.get(mode);
    let mut x = [0.0; N_ATTRIBUTES];
    x[AttributeId::AcquisitionCost.index()] = if mode == ModeId::PublicTransit {
        1.0
    } else {
        clamp01(1.0 - p.acquisition_price / (env.price_income_multiple * agent.annual_income()))
    };
    let monthly_cost = p.cost_per_km * agent.commute_distance * env.trips_per_year / 12.0;
    x[AttributeId::OperatingCost.index()] = clamp01(1.0 - monthly_cost / (env.opcost_income_share * agent.income));
    x[AttributeId::Comfort.index()] = p.comfort;
    x[AttributeId::RoadSafety.index()] = clamp01(1.0 - p.safety_risk / env.risk_max);
    x[AttributeId::PersonalSecurity.index()] = p.security;
    x[AttributeId::TravelTime.index()] = clamp01((env.time_max - minutes) / (env.time_max - env.time_min));
    x[AttributeId::Emissions.index()] = clamp01(1.0 - passenger_gpkm(mode, p, env) / env.gpkm_max);
    x
}

/// System indicators for one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSnapshot {
    pub period: u32,
    /// Cumulative ticks simulated at the end of the period.
    pub tick: u64,
    pub year: u32,
    /// Mode shares at the end of the period, in [`ModeId`] order.
    pub shares: [f64; 3],
    pub avg_travel_time: f64,
    pub avg_speed: f64,
    /// kg CO2 per year.
    pub co2_total: f64,
    pub accidents_per_100k: f64,
    /// Agents per strategy in [`StrategyKind`] order; all zero for the initial row.
    pub strategy_counts: [usize; 4],
}

/// Indicators for a set of commutes; `minutes[i]` is agent `i`'s mean trip time on its current mode.
pub fn compute_indicators(
    agents: &[Agent],
    minutes: &[f64],
    modes: &ModeState,
    env: &EnvironmentConfig,
) -> IndicatorSnapshot {
    let n = agents.len().max(1) as f64;
    let mut time_sum = 0.0;
    let mut dist_sum = 0.0;
    let mut dist_speed = 0.0;
    let mut co2_g = 0.0;
    let mut accidents = 0.0;
    for (a, &t) in agents.iter().zip(minutes) {
        let p = modes.get(a.current_mode);
        let d = a.commute_distance;
        time_sum += t;
        dist_sum += d;
        if t > 0.0 {
            dist_speed += d * (d / (t / 60.0));
        }
        let yearly_km = d * env.trips_per_year;
        co2_g += yearly_km * passenger_gpkm(a.current_mode, p, env);
        accidents += yearly_km * p.safety_risk / 1e8;
    }
    IndicatorSnapshot {
        period: 0,
        tick: 0,
        year: 0,
        shares: mode_shares(agents),
        avg_travel_time: time_sum / n,
        avg_speed: if dist_sum > 0.0 { dist_speed / dist_sum } else { 0.0 },
        co2_total: co2_g / 1000.0,
        accidents_per_100k: accidents * 1e5 / n,
        strategy_counts: [0; 4],
    }
}

/// Everything a replication needs besides its random stream.
#[derive(Debug, Clone)]
pub struct SimulationParts {
    pub agents: Vec<Agent>,
    pub graph: SocialGraph,
    pub modes: ModeState,
    pub env: EnvironmentConfig,
    pub consumat: ConsumatConfig,
    pub policies: Vec<PolicyIntervention>,
}

pub struct Simulation {
    agents: Vec<Agent>,
    graph: SocialGraph,
    base_modes: ModeState,
    env: EnvironmentConfig,
    consumat: ConsumatConfig,
    policies: Vec<PolicyIntervention>,
    uncertainty: Box<dyn UncertaintyModel>,
    rng: ChaCha8Rng,
    period: u32,
    tick: u64,
}

impl Simulation {
    pub fn new(parts: SimulationParts, rng: ChaCha8Rng) -> Result<Self> {
        parts.modes.validate()?;
        parts.env.validate()?;
        parts.consumat.validate()?;
        if parts.graph.node_count() != parts.agents.len() {
            return Err(Error::config("network", "graph size does not match the population"));
        }
        if parts.agents.iter().any(|a| a.weight_sum() <= 0.0) {
            return Err(Error::config("population.weights", "agent with all-zero weights"));
        }
        apply_policies(&parts.modes, &parts.policies)?;
        Ok(Simulation {
            agents: parts.agents,
            graph: parts.graph,
            base_modes: parts.modes,
            env: parts.env,
            consumat: parts.consumat,
            policies: parts.policies,
            uncertainty: Box::new(ConvexUncertainty),
            rng,
            period: 0,
            tick: 0,
        })
    }

    /// Replaces the uncertainty functional form.
    pub fn with_uncertainty_model(mut self, model: Box<dyn UncertaintyModel>) -> Self {
        self.uncertainty = model;
        self
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    /// Mode state in force during `period` (periods count from 1).
    pub fn modes_for_period(&self, period: u32) -> ModeState {
        let year = period.saturating_sub(1);
        let active: Vec<PolicyIntervention> = self.policies.iter().filter(|p| p.active_in(year)).copied().collect();
        apply_policies(&self.base_modes, &active).expect("policies validated at construction")
    }

    fn capacity(&self) -> f64 {
        self.env.capacity_per_agent * self.agents.len() as f64
    }

    fn volume(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| match a.current_mode {
                ModeId::Car => 1.0,
                ModeId::Motorcycle => self.env.motorcycle_pce,
                ModeId::PublicTransit => 0.0,
            })
            .sum()
    }

    /// Noise-free trip minutes for every agent and mode under the current traffic.
    fn expected_times(&self, modes: &ModeState) -> Vec<[f64; 3]> {
        let ratio = self.volume() / self.capacity();
        self.agents
            .iter()
            .map(|a| ModeId::ALL.map(|m| travel_time_unchecked(m, a.commute_distance, ratio, modes.get(m), &self.env)))
            .collect()
    }

    /// Indicators of the initial state (period 0), without simulating ticks.
    pub fn initial_snapshot(&self) -> IndicatorSnapshot {
        let modes = self.modes_for_period(0);
        let expected = self.expected_times(&modes);
        let minutes: Vec<f64> = self.agents.iter().zip(&expected).map(|(a, t)| t[a.current_mode.index()]).collect();
        let mut snap = compute_indicators(&self.agents, &minutes, &modes, &self.env);
        snap.period = 0;
        snap.year = 0;
        snap.tick = self.tick;
        snap
    }

    /// Simulates one commute year followed by one synchronous decision round.
    pub fn step_period(&mut self) -> IndicatorSnapshot {
        self.period += 1;
        let modes = self.modes_for_period(self.period);
        let expected = self.expected_times(&modes);
        let ticks = self.env.ticks_per_period;

        // Commute: accumulate experienced times on the current mode.
        let sd = self.env.time_noise_sd;
        let mut experienced = vec![0.0; self.agents.len()];
        for (i, a) in self.agents.iter().enumerate() {
            let base = expected[i][a.current_mode.index()];
            let mut total = 0.0;
            for _ in 0..ticks {
                let z: f64 = if sd > 0.0 { StandardNormal.sample(&mut self.rng) } else { 0.0 };
                total += base * (sd * z - 0.5 * sd * sd).exp();
            }
            experienced[i] = total / ticks as f64;
        }
        self.tick += ticks as u64;
        let mut snap = compute_indicators(&self.agents, &experienced, &modes, &self.env);

        let smoothing = self.consumat.experience_smoothing;
        for a in self.agents.iter_mut() {
            update_experience(&mut a.experience, a.current_mode, smoothing);
        }

        let (next, counts) = self.decision_round(&modes, &expected, &experienced);
        for (a, m) in self.agents.iter_mut().zip(next) {
            if m.is_private() {
                a.owns[m.index()] = true;
            }
            a.current_mode = m;
        }

        snap.period = self.period;
        snap.year = self.period;
        snap.tick = self.tick;
        snap.shares = mode_shares(&self.agents);
        snap.strategy_counts = counts;
        snap
    }

    /// Every agent evaluates the same pre-decision state; decisions are
    /// collected in id order and applied afterwards.
    fn decision_round(
        &mut self,
        modes: &ModeState,
        expected: &[[f64; 3]],
        experienced: &[f64],
    ) -> (Vec<ModeId>, [usize; 4]) {
        let prices = modes.prices();
        let mut counts = [0usize; 4];
        let mut next = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            let neighbors = self.graph.neighbors(i).expect("graph covers every agent");
            let mut neighbor_counts = [0usize; 3];
            for &j in neighbors {
                neighbor_counts[self.agents[j].current_mode.index()] += 1;
            }
            let satisfaction = ModeId::ALL.map(|m| {
                let minutes = if m == a.current_mode { experienced[i] } else { expected[i][m.index()] };
                compute_satisfaction(&a.weights, &attribute_satisfaction(a, m, modes, minutes, &self.env))
            });
            let current = a.current_mode;
            let peer_share = if neighbors.is_empty() {
                0.0
            } else {
                neighbor_counts[current.index()] as f64 / neighbors.len() as f64
            };
            let u = self.uncertainty.uncertainty(
                a.uncertainty_avoidance,
                a.collectivism,
                a.experience[current.index()],
                peer_share,
            );
            let strategy = select_strategy(satisfaction[current.index()], a.sat_threshold, u, a.unc_threshold);
            counts[strategy.index()] += 1;
            let ctx = DecisionContext {
                current,
                neighbor_counts,
                satisfaction,
                available: availability(a, prices, &self.consumat),
            };
            next.push(decide_mode(strategy, &ctx, &mut self.rng));
        }
        (next, counts)
    }

    /// Initial snapshot followed by `periods` simulated periods.
    pub fn run(&mut self, periods: u32) -> Vec<IndicatorSnapshot> {
        let mut out = Vec::with_capacity(periods as usize + 1);
        out.push(self.initial_snapshot());
        for _ in 0..periods {
            out.push(self.step_period());
        }
        out
    }
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("agents", &self.agents.len())
            .field("edges", &self.graph.edge_count())
            .field("period", &self.period)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, NetworkConfig};
    use crate::population::{synthesize_population, DemographicConfig};
    use crate::rng::{stream, Stream};

    fn car() -> ModeParams {
        ModeState::default().car
    }

    #[test]
    fn free_flow_time() {
        let env = EnvironmentConfig::default();
        let modes = ModeState::default();
        let t = congested_travel_time(ModeId::Car, 10.0, 0.0, 100.0, &modes.car, &env).unwrap();
        assert!((t - 20.0).abs() < 1e-12);
        let t = congested_travel_time(ModeId::PublicTransit, 10.0, 0.0, 100.0, &modes.public, &env).unwrap();
        assert!((t - (60.0 * 10.0 / modes.public.base_speed + modes.public.headway / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn bpr_at_capacity() {
        let env = EnvironmentConfig::default();
        let t = congested_travel_time(ModeId::Car, 10.0, 50.0, 50.0, &car(), &env).unwrap();
        assert!((t - 23.0).abs() < 1e-9);
    }

    #[test]
    fn motorcycles_filter_through_congestion() {
        let env = EnvironmentConfig::default();
        let moto = ModeState::default().motorcycle;
        let t = congested_travel_time(ModeId::Motorcycle, 35.0, 50.0, 50.0, &moto, &env).unwrap();
        assert!((t - 60.0 * (1.0 + 0.5 * 0.15)).abs() < 1e-9);
    }

    #[test]
    fn doubling_headway_adds_five_minutes() {
        let env = EnvironmentConfig::default();
        let mut p = ModeState::default().public;
        p.headway = 10.0;
        let a = congested_travel_time(ModeId::PublicTransit, 8.0, 30.0, 60.0, &p, &env).unwrap();
        p.headway = 20.0;
        let b = congested_travel_time(ModeId::PublicTransit, 8.0, 30.0, 60.0, &p, &env).unwrap();
        assert!((b - a - 5.0).abs() < 1e-9);
    }

    #[test]
    fn zero_capacity_is_config_error() {
        let env = EnvironmentConfig::default();
        assert!(matches!(congested_travel_time(ModeId::Car, 1.0, 1.0, 0.0, &car(), &env), Err(Error::Config { .. })));
    }

    #[test]
    fn more_vehicles_never_faster() {
        let env = EnvironmentConfig::default();
        let modes = ModeState::default();
        for m in [ModeId::Car, ModeId::Motorcycle] {
            let mut prev = 0.0;
            for v in 0..200 {
                let t = congested_travel_time(m, 12.0, v as f64, 80.0, modes.get(m), &env).unwrap();
                assert!(t >= prev);
                prev = t;
            }
        }
    }

    fn one_agent() -> Agent {
        let cfg = DemographicConfig { n_agents: 1, ..Default::default() };
        let mut rng = stream(1, Stream::Population);
        synthesize_population(&cfg, &mut rng).unwrap().remove(0)
    }

    #[test]
    fn satisfaction_endpoints() {
        let env = EnvironmentConfig::default();
        let mut modes = ModeState::default();
        modes.public.cost_per_km = 0.0;
        modes.car.emissions_gpkm = env.gpkm_max;
        let a = one_agent();
        let x = attribute_satisfaction(&a, ModeId::PublicTransit, &modes, env.time_max, &env);
        assert_eq!(x[AttributeId::OperatingCost.index()], 1.0);
        assert_eq!(x[AttributeId::AcquisitionCost.index()], 1.0);
        assert_eq!(x[AttributeId::TravelTime.index()], 0.0);
        let x = attribute_satisfaction(&a, ModeId::Car, &modes, env.time_min, &env);
        assert_eq!(x[AttributeId::TravelTime.index()], 1.0);
        assert_eq!(x[AttributeId::Emissions.index()], 0.0);
        assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn co2_single_car_commuter() {
        let env = EnvironmentConfig::default();
        let modes = ModeState::default();
        let mut a = one_agent();
        a.commute_distance = 10.0;
        a.current_mode = ModeId::Car;
        let snap = compute_indicators(&[a], &[20.0], &modes, &env);
        assert!((snap.co2_total - 960.0).abs() < 1e-9);
        assert!((snap.avg_speed - 30.0).abs() < 1e-9);
    }

    #[test]
    fn co2_zero_with_clean_buses() {
        let env = EnvironmentConfig::default();
        let mut modes = ModeState::default();
        modes.public.emissions_gpkm = 0.0;
        let mut a = one_agent();
        a.current_mode = ModeId::PublicTransit;
        let agents = vec![a.clone(), a.clone(), a];
        let snap = compute_indicators(&agents, &[30.0; 3], &modes, &env);
        assert_eq!(snap.co2_total, 0.0);
        assert_eq!(snap.shares, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn accidents_rise_when_a_driver_switches_to_motorcycle() {
        let env = EnvironmentConfig::default();
        let modes = ModeState::default();
        let mut a = one_agent();
        a.current_mode = ModeId::Car;
        let mut b = a.clone();
        b.id = 1;
        let before = compute_indicators(&[a.clone(), b.clone()], &[20.0, 20.0], &modes, &env);
        b.current_mode = ModeId::Motorcycle;
        let after = compute_indicators(&[a, b], &[20.0, 20.0], &modes, &env);
        assert!(after.accidents_per_100k > before.accidents_per_100k);
    }

    fn simulation(n: usize, seed: u64, tweak: impl Fn(&mut Agent)) -> Simulation {
        let cfg = DemographicConfig { n_agents: n, ..Default::default() };
        let mut agents = synthesize_population(&cfg, &mut stream(seed, Stream::Population)).unwrap();
        agents.iter_mut().for_each(&tweak);
        let graph = build_network(&agents, &NetworkConfig::default(), &mut stream(seed, Stream::Network)).unwrap();
        let parts = SimulationParts {
            agents,
            graph,
            modes: ModeState::default(),
            env: EnvironmentConfig::default(),
            consumat: ConsumatConfig::default(),
            policies: vec![],
        };
        Simulation::new(parts, stream(seed, Stream::Dynamics)).unwrap()
    }

    #[test]
    fn ten_years_is_ten_rounds_and_three_hundred_ticks() {
        let mut sim = simulation(300, 3, |_| {});
        let snaps = sim.run(10);
        assert_eq!(snaps.len(), 11);
        assert_eq!(snaps.last().unwrap().tick, 300);
        assert_eq!(snaps.last().unwrap().period, 10);
        for s in &snaps[1..] {
            assert_eq!(s.strategy_counts.iter().sum::<usize>(), 300);
            assert!((s.shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(sim.agents().len(), 300);
    }

    #[test]
    fn satisfied_and_certain_agents_never_move() {
        let mut sim = simulation(300, 4, |a| {
            a.sat_threshold = 1e-9;
            a.unc_threshold = 1.0 - 1e-9;
        });
        let snaps = sim.run(10);
        for s in &snaps[1..] {
            assert_eq!(s.shares, snaps[0].shares);
            assert_eq!(s.strategy_counts, [300, 0, 0, 0]);
        }
    }

    #[test]
    fn same_seed_same_series() {
        let a = simulation(200, 9, |_| {}).run(5);
        let b = simulation(200, 9, |_| {}).run(5);
        assert_eq!(a, b);
    }
}
