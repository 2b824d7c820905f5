//! Numerical laboratory for attracting invariant circles of dissipative
//! twist maps of the cylinder.
//!
//! The crate is `no_std` (with `alloc`). Modules, bottom-up:
//!
//! * [`trig`]: truncated Fourier series and monotone circle lifts.
//! * [`diophantine`]: continued fractions, certified Diophantine constants,
//!   rotation numbers of orbits.
//! * [`smalldiv`]: difference equations on the circle with small divisors.
//! * [`maps`]: the map family, its coordinate frames and closed forms.
//! * [`graphflow`]: Lipschitz graphs, the graph transform and its gate.
//! * [`russmann`]: translated-curve Newton solver and the curves `C_α`.
//! * [`normalform`]: localisation at the translated curve, order-`k`
//!   reduction, invariant radius and region classification.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diophantine;
pub mod fft;
pub mod graphflow;
pub mod jet;
pub mod maps;
pub mod math;
pub mod normalform;
pub mod russmann;
pub mod smalldiv;
pub mod trig;

pub use diophantine::DiophantineNumber;
pub use maps::{Params, Perturbation};
pub use num_complex::Complex64;
pub use trig::{CircleLift, TrigPoly};
