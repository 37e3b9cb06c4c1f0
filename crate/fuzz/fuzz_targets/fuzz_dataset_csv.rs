//! Fuzzes the dataset CSV reader: arbitrary bytes must parse or error,
//! never panic. A table that parses must also satisfy the invariants the
//! rest of the crate relies on (rectangular shape, finite values, binary
//! labels), and converting it onward must not panic either.

#![no_main]

use libfuzzer_sys::fuzz_target;

use ctrf::dataset::{read_csv, Source};

fuzz_target!(|data: &[u8]| {
    let Ok(table) = read_csv(data) else { return };

    let n_rows = table.n_rows();
    assert_eq!(table.features.len(), n_rows * table.feature_names.len());
    assert!(table.features.iter().all(|v| v.is_finite()));
    if let Some(labels) = &table.labels {
        assert_eq!(labels.len(), n_rows);
        assert!(labels.iter().all(|&y| y <= 1));
    }

    if let Ok(view) = table.feature_view() {
        assert_eq!(view.n_rows(), n_rows);
    }
    // May reject (e.g. missing labels), but must not panic.
    let _ = table.into_dataset(Some(Source::Test));
});
