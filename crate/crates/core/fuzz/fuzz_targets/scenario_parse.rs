#![no_main]

use iiq::simulator::parse_scenarios;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(profiles) = parse_scenarios(text) {
        for spec in profiles.values() {
            spec.validate().expect("parsed profiles are valid");
        }
    }
});
