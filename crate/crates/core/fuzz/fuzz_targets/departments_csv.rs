#![no_main]

use iiq::persist::report::{read_departments, write_departments};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = read_departments(data) {
        let mut out = Vec::new();
        write_departments(&mut out, &map).expect("in-memory write");
        assert_eq!(read_departments(out.as_slice()).expect("round trip"), map);
    }
});
