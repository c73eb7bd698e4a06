#![no_main]

use iiq::persist::StateSnapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(snap) = StateSnapshot::from_json_unchecked(text) {
        let json = snap.to_json();
        let back = StateSnapshot::from_json_unchecked(&json).expect("saved snapshot loads");
        assert_eq!(back, snap);
        assert_eq!(back.to_json(), json);
    }
});
