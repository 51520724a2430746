#![no_main]

use libfuzzer_sys::fuzz_target;
use strawnet::format::{parse_network, parse_network_unvalidated, parse_network_with, ParseOptions};
use strawnet::validate_network;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let raw = parse_network_unvalidated(text);
    let _ = raw.as_ref().map(validate_network);
    let strict = parse_network(text);
    if strict.is_ok() {
        assert!(raw.is_ok());
    }
    let _ = parse_network_with(text, ParseOptions { renormalize: true });
});
