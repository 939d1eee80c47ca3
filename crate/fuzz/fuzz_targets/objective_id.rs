#![no_main]

use comma_ea::benchmarks::ObjectiveKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kind) = text.parse::<ObjectiveKind>() {
        let again: ObjectiveKind = kind.to_string().parse().expect("display output parses");
        assert_eq!(kind, again);
        let _ = kind.instantiate(16, None);
    }
});
