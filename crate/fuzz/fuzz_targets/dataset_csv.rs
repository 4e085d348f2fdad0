#![no_main]

use libfuzzer_sys::fuzz_target;
use neurocollide::dataset::parse_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_csv(text) {
        assert_eq!(rows.features.nrows(), rows.labels.len());
        assert_eq!(rows.labels.len(), rows.splits.len());
        assert!(rows.features.iter().all(|v| v.is_finite()));
        assert!(rows.labels.iter().all(|&l| l <= 1));
    }
});
