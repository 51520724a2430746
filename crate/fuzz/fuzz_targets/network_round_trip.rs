#![no_main]

use libfuzzer_sys::fuzz_target;
use strawnet::format::{parse_network, serialize_network};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(net) = parse_network(text) else {
        return;
    };
    let out = serialize_network(&net);
    let back = parse_network(&out).expect("serialized network must parse");
    assert!(back.approx_eq(&net, 1e-9));
    assert_eq!(serialize_network(&back), out);
});
