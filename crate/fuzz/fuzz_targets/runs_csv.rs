#![no_main]

use comma_ea::experiment::{compare_to_theory, read_runs_csv, summarize_runs, TheorySettings};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_runs_csv(data) {
        let rows = summarize_runs(&records, "jump", &TheorySettings::default());
        let report = compare_to_theory(&rows);
        assert_eq!(report.comparisons.len(), rows.len());
    }
});
