use modeshift::harness::ScenarioConfig;

#[test]
fn shipped_scenario_matches_builtin_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/cali-default.toml");
    let cfg = ScenarioConfig::from_path(path).unwrap();
    assert_eq!(cfg.hash(), ScenarioConfig::default().hash());
}
