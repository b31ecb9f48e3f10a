#![no_main]
use libfuzzer_sys::fuzz_target;
use manifold_ctrl::rigid_body::RigidVariant;
use manifold_ctrl_cli::ScenarioName;

fuzz_target!(|data: &str| {
    if let Ok(name) = data.parse::<ScenarioName>() {
        assert_eq!(name.name().parse::<ScenarioName>().unwrap(), name);
    }
    if let Ok(variant) = data.parse::<RigidVariant>() {
        assert_eq!(variant.name().parse::<RigidVariant>().unwrap(), variant);
    }
});
