#![no_main]

use libfuzzer_sys::fuzz_target;
use magictrace::harness::Ansatz;
use magictrace::state::{format_bitstring, parse_bitstring};
use magictrace::{DistanceMode, GateKind, LogBase, PauliString};

fuzz_target!(|text: &str| {
    if let Ok(v) = parse_bitstring(text) {
        assert_eq!(format_bitstring(text.len(), v), text);
    }
    if let Ok(p) = PauliString::from_label(text) {
        assert_eq!(PauliString::from_label(&p.label()).unwrap(), p);
    }
    let _ = text.parse::<GateKind>();
    let _ = text.parse::<DistanceMode>();
    let _ = text.parse::<LogBase>();
    let _ = text.parse::<Ansatz>();
});
