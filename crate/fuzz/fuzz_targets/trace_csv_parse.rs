#![no_main]

use libfuzzer_sys::fuzz_target;
use magictrace::harness::{read_trace_csv, trace_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_trace_csv(data) else {
        return;
    };
    // Writing rounds to 12 significant digits, so a second pass is a fixed point.
    let text = trace_csv_string(&rows).expect("parsed rows serialise");
    let rows = read_trace_csv(text.as_bytes()).expect("written trace parses");
    assert_eq!(trace_csv_string(&rows).unwrap(), text);
});
