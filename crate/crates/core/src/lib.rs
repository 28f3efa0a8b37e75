//! Multi-period two-dimensional non-guillotine cutting with usable leftovers.
//!
//! Objects are bought over a finite horizon to cut ordered rectangular items;
//! two guillotine pre-cuts per object leave a top and a right-hand leftover
//! that stay available for a limited number of instants and carry value at
//! the end of the horizon when a catalogue item fits in them.

pub mod decode;
pub mod genealogy;
pub mod harness;
pub mod instance;
pub mod matheuristic;
pub mod model;
pub mod oracle;
pub mod plan;
pub mod solver;
