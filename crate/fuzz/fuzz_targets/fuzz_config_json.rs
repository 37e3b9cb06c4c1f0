//! Fuzzes experiment-config parsing: arbitrary JSON text against every
//! config schema (including the experiment-tag check). Parsing must never
//! panic, and an accepted config must survive its own validation without
//! panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

use ctrf::runner::config::{
    parse_config_json, AuctionRunConfig, ExperimentKind, ShiftScoreConfig, SimulationConfig,
    TrainPredictConfig,
};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };

    if let Ok(cfg) = parse_config_json::<SimulationConfig>(text, ExperimentKind::Simulation) {
        let _ = cfg.validate();
    }
    if let Ok(cfg) = parse_config_json::<AuctionRunConfig>(text, ExperimentKind::Auction) {
        let _ = cfg.validate();
    }
    if let Ok(cfg) =
        parse_config_json::<TrainPredictConfig>(text, ExperimentKind::TrainPredict)
    {
        let _ = cfg.validate();
    }
    if let Ok(cfg) = parse_config_json::<ShiftScoreConfig>(text, ExperimentKind::ShiftScore) {
        let _ = cfg.validate();
    }
});
