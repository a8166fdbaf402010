//! The bundled example models from the `models/` directory.

use crate::model::KripkeModel;
use crate::parse::parse_model;

pub const TRAFFIC_LIGHT: &str = include_str!("../../../models/traffic_light.kmod");
pub const FAULTY_TRAFFIC_LIGHT: &str = include_str!("../../../models/faulty_traffic_light.kmod");
pub const CHAIN: &str = include_str!("../../../models/chain.kmod");
pub const SPURIOUS_PATH: &str = include_str!("../../../models/spurious_path.kmod");
pub const SEPARATION: &str = include_str!("../../../models/separation/separation.kmod");

fn load(text: &str) -> KripkeModel {
    parse_model(text).expect("bundled model parses")
}

/// Three-state stop/go traffic light; `GF state=stop` holds.
pub fn traffic_light() -> KripkeModel {
    load(TRAFFIC_LIGHT)
}

/// Traffic light with a green self-loop; `GF state=stop` fails.
pub fn faulty_traffic_light() -> KripkeModel {
    load(FAULTY_TRAFFIC_LIGHT)
}

/// Four-state chain over `v1..v4`.
pub fn chain() -> KripkeModel {
    load(CHAIN)
}

/// Twelve states in four `pos` blocks with a dead/bad/isolated split in block `c`.
pub fn spurious_path() -> KripkeModel {
    load(SPURIOUS_PATH)
}

/// Three variables where only `x3` separates the dead state from the bad one.
pub fn separation() -> KripkeModel {
    load(SEPARATION)
}
