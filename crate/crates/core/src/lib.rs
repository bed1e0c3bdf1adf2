//! Symmetry-constrained planar flows.
//!
//! A parametric family of plane diffeomorphisms is obtained by integrating a
//! truncated Fourier vector field that has been symmetrized against a lattice,
//! rotation centers, and transflection (glide) axes. Because the field commutes
//! with the chosen symmetry group, the induced diffeomorphism deforms a
//! template tile into shapes that still tile the plane, and it descends to a
//! well-defined flow on quotient surfaces (torus, sphere, Klein bottle,
//! projective plane). On top of the field/flow core sit two applications:
//! gradient-based tile-shape optimization against a silhouette target, and
//! density estimation on identification spaces by maximum likelihood.

pub mod escher;
pub mod field;
pub mod flow;
pub mod geom;
pub mod identspace;
pub mod io;
pub mod isohedral;
pub mod optim;
pub mod report;

pub use field::{FourierParams, SymmetrizedField, SymmetryOp};
pub use flow::IntegratorConfig;
pub use geom::{AffineMap, Line, Point2, Polygon, Vec2};

