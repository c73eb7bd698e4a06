#![no_main]

use iiq::persist::{parse_event_line, parse_event_log, render_event_line};
use iiq::types::TEXT_CHAR_CAP;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_event_log(text) else {
        return;
    };
    for (line, r) in records {
        r.event.validate().expect("parsed events are valid");
        // Keywords come from the untruncated prompt, so only short prompts
        // survive a render round trip unchanged.
        if r.event.task.char_len() < TEXT_CHAR_CAP {
            let again = parse_event_line(&render_event_line(&r.event, r.level), line)
                .expect("rendered line parses");
            assert_eq!(again, r);
        }
    }
});
