//! Every chapter of the guide as a doc module, so `cargo test --doc` runs
//! its code blocks against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/meshes.md")]
pub mod meshes {}
#[doc = include_str!("../../../book/src/hierarchy.md")]
pub mod hierarchy {}
#[doc = include_str!("../../../book/src/binding.md")]
pub mod binding {}
#[doc = include_str!("../../../book/src/deformation.md")]
pub mod deformation {}
#[doc = include_str!("../../../book/src/losses.md")]
pub mod losses {}
#[doc = include_str!("../../../book/src/registration.md")]
pub mod registration {}
#[doc = include_str!("../../../book/src/autoencoder.md")]
pub mod autoencoder {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/testing.md")]
pub mod testing {}
