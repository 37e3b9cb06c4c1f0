//! Fuzzes the model-document decoder: arbitrary bytes through
//! `load_model_bytes` must parse-and-validate or error, never panic. A
//! document that passes validation must be safe to predict with.

#![no_main]

use libfuzzer_sys::fuzz_target;

use ctrf::serialize::{load_model_bytes, LoadedModel};

fuzz_target!(|data: &[u8]| {
    let Ok(model) = load_model_bytes(data) else { return };

    // Validated models must predict on a well-shaped row without panicking.
    let n_features = match &model {
        LoadedModel::Forest(f) => f.n_features(),
        LoadedModel::Ctrf(m) => m.forest().n_features(),
    };
    let row = vec![0.5; n_features];
    let value = match &model {
        LoadedModel::Forest(f) => f.predict(&row).expect("validated forest must predict"),
        LoadedModel::Ctrf(m) => m.predict(&row).expect("validated model must predict"),
    };
    assert!(value.is_finite());
});
