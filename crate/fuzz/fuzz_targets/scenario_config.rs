#![no_main]
use libfuzzer_sys::fuzz_target;
use manifold_ctrl_cli::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ScenarioConfig::from_json(text) else {
        return;
    };
    // A parsed config must serialise and parse back to itself.
    let again = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ScenarioConfig::from_json(&again).unwrap(), cfg);

    // Validation may reject the config but must not panic.
    if let Ok(jobs) = cfg.jobs() {
        assert!(!jobs.is_empty());
        for job in &jobs {
            assert!(job.sim.dt > 0.0 && job.sim.t_end > 0.0);
        }
    }
});
