#![no_main]

use libfuzzer_sys::fuzz_target;
use magictrace::Circuit;

fuzz_target!(|text: &str| {
    let Ok(c) = Circuit::parse_text(text) else {
        return;
    };
    let again = Circuit::parse_text(&c.to_text()).expect("emitted circuit must parse");
    assert_eq!(again, c);
    for g in c.gates() {
        g.validate(c.n()).expect("parsed gates are valid");
    }
});
