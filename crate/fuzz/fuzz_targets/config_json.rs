#![no_main]

use libfuzzer_sys::fuzz_target;
use magictrace::harness::ExperimentConfig;

fuzz_target!(|text: &str| {
    let Ok(cfg) = ExperimentConfig::from_json(text) else {
        return;
    };
    let _ = cfg.validate();
    let _ = cfg.sre_config();
    let _ = cfg.optimizer.validate(cfg.p * 2);
});
