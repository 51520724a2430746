#![no_main]

use libfuzzer_sys::fuzz_target;
use strawnet::corpus::cancer;
use strawnet::format::parse_findings;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let net = cancer();
    if let Ok(ev) = parse_findings(text, &net) {
        ev.validate(&net).unwrap();
        assert_eq!(parse_findings(&ev.to_string(), &net).unwrap(), ev);
    }
});
