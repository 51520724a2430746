//! Networks bundled with the crate.

use crate::format::parse_network;
use crate::network::Network;

/// Source text of the liver/breast cancer diagnostic network.
pub const CANCER_NET: &str = include_str!("../corpus/cancer.net");

/// The liver/breast cancer diagnostic network.
pub fn cancer() -> Network {
    parse_network(CANCER_NET).expect("bundled cancer.net is valid")
}
