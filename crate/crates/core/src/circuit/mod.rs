//! Gate IR, statevector simulation, purification gadgets and the
//! circuit-level Algorithm 1.

pub mod alg1;
pub mod gadgets;
pub mod gate;
pub mod sim;

pub use alg1::{
    build_segment, build_w, oaa, run_algorithm1, Alg1Options, GadgetLibrary, Route, SampledRun, Segment,
    SegmentLayout,
};
pub use gadgets::{rotation, PurificationCircuit, SlotLayout};
pub use gate::{Circuit, Cond, Gate, GateTally};
pub use sim::{qubit_cap, simulate};
