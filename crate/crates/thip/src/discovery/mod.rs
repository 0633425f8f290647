//! Process discovery: from event logs to process trees to Petri nets.
//!
//! [`discover_tree`] mines a block-structured model that replays every trace
//! of its input log, [`tree_to_petri`] compiles it into a workflow net, and
//! [`discover_net`] chains the two. Nets execute through markings and
//! transition firing and serialize to a plain text format.

mod miner;
mod petri;
mod tree;

pub use miner::{discover_tree, DiscoveryError};
pub use petri::{
    tree_to_petri, Marking, NetBuilder, NetError, PetriNet, PlaceId, Transition, TransitionId,
    REPLAY_STATE_BOUND,
};
pub use tree::{ModelError, ProcessTree};

use crate::eventlog::EventLog;

/// Discovers a model and compiles it to a workflow net in one step.
pub fn discover_net(log: &EventLog) -> Result<PetriNet, DiscoveryError> {
    let tree = discover_tree(log)?;
    Ok(tree_to_petri(&tree).expect("discovered trees are structurally valid"))
}
