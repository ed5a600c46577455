//! The guide's chapters as doc modules, so `cargo test` runs every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/observer.md")]
pub mod observer {}
#[doc = include_str!("../../../book/src/fluid_queue.md")]
pub mod fluid_queue {}
#[doc = include_str!("../../../book/src/distribution.md")]
pub mod distribution {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
