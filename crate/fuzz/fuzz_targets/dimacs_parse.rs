#![no_main]

use libfuzzer_sys::fuzz_target;
use magictrace::CnfFormula;

fuzz_target!(|text: &str| {
    if let Ok(f) = CnfFormula::parse_dimacs(text) {
        let again = CnfFormula::parse_dimacs(&f.to_dimacs()).expect("emitted DIMACS must parse");
        assert_eq!(again, f);
    }
});
