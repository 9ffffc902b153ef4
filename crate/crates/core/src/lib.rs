//! Tri-layer electricity market: wholesale clearing, retail pricing by a
//! load-serving entity, and end-user response, solved jointly as a
//! mixed-integer program.

pub mod euc;
pub mod harness;
pub mod joint;
pub mod market;
pub mod network;
pub mod optimizer;
pub mod wem;
