#![no_main]

use iiq::persist::report::{read_results, write_results};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_results(data) else {
        return;
    };
    let mut out = Vec::new();
    if write_results(&mut out, &rows, 86_400).is_ok() {
        let again = read_results(out.as_slice()).expect("written results parse");
        assert_eq!(again.len(), rows.len());
    }
});
