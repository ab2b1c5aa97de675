//! Weighted substitutions and the self-similar square tilings they generate.
//!
//! A weighted substitution maps each letter of a colored alphabet to a word
//! of (letter, weight) pairs whose weights sum to one. Iterating it tiles
//! the upper half plane with admissible squares; the multiplicative group
//! generated by the cylinder weights decides whether tile sizes form a
//! lattice or a dense set; periodic orbits of the child graph carry a zeta
//! function with a determinant closed form; and the one-letter binary
//! system embeds the dyadic solenoid, whose arithmetic lives in
//! [`solenoid`].
//!
//! The pieces compose left to right: [`substitution`] holds the rules,
//! [`base_group`] classifies the weight group and builds the height
//! function, [`tiling`] expands window patches from a seed phase,
//! [`sampler`] draws equilibrium patches, [`orbit`] and [`zeta`] count
//! cycles and evaluate zeta functions, [`render`] draws SVG, and [`io`]
//! speaks JSON.

pub mod base_group;
pub mod error;
pub mod exec;
pub mod io;
pub mod matrix;
pub mod orbit;
pub mod poly;
pub mod rational;
pub mod render;
pub mod sampler;
pub mod solenoid;
pub mod substitution;
pub mod systems;
pub mod tiling;
pub mod weight;
pub mod zeta;

pub use error::{Error, Result};
