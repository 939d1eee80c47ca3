#![no_main]

use comma_ea::experiment::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ExperimentSpec::from_json(text) {
        // Bounded so that huge grids in the input cannot stall the fuzzer.
        if let Ok(points) = spec.grid() {
            for p in points.iter().take(64) {
                let _ = spec.objective_for(p);
                let _ = spec.config_for(p).validate();
            }
        }
        let json = serde_json::to_string(&spec).expect("spec serializes");
        let back = ExperimentSpec::from_json(&json).expect("serialized spec parses");
        assert_eq!(back.grid().ok(), spec.grid().ok());
    }
});
