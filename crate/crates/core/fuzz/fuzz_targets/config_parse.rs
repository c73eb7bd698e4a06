#![no_main]

use iiq::config::EngineConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = EngineConfig::parse(text) {
        cfg.validate().expect("parsed configs are valid");
        let rendered = cfg.render();
        let back = EngineConfig::parse(&rendered).expect("rendered config parses");
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }
});
