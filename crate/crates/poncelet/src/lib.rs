//! Computational engine for Poncelet closure over finite fields.
//!
//! Given a pair of nonsingular conics `A`, `B` in the projective plane over
//! `F_q` (odd `q`), Cayley's criterion decides whether an `n`-gon inscribed
//! in `A` and circumscribed about `B` closes up, as the vanishing of a small
//! Hankel determinant in the Maclaurin coefficients of `sqrt(det(tA + B))`.
//! This crate implements that criterion entirely inside `F_q`, the explicit
//! chain-of-tangents construction that witnesses it geometrically, and the
//! census machinery that counts closure pairs across pencils of conics and
//! across random pairs.
//!
//! Modules, bottom up:
//!
//! * [`gf`] — finite-field contexts and element arithmetic;
//! * [`geom`] — points, lines and conics of the projective plane, with
//!   polarity and intersection;
//! * [`pencil`] — characteristic cubics `det(tA + B)`, transversality, and
//!   the five eligible pencil classes with four-point base loci;
//! * [`cayley`] — the square-root series and the `n`-gon Hankel conditions
//!   for `3 <= n <= 9`;
//! * [`chain`] — tangent-chain traces: the geometric construction that
//!   cross-checks the algebraic criterion;
//! * [`census`] — exhaustive and Monte-Carlo counting experiments with
//!   deterministic seeding and report serialization;
//! * [`oracle`] — deliberately brute-force reference implementations used
//!   by the test suites to cross-check the fast paths.

pub mod cayley;
pub mod census;
pub mod chain;
pub mod geom;
pub mod gf;
pub mod oracle;
pub mod pencil;
