//! Closed-form and search-based inverse kinematics for 6R manipulators
//! built on six canonical circle-intersection subproblems.
//!
//! The layers, bottom up:
//!
//! - [`geom`]: vectors, rotations, and the circle-to-plane linearization.
//! - [`polyroot`]: closed-form quartic roots and ellipse-ellipse intersection.
//! - [`subproblems`]: the six canonical subproblems with exact, least-squares,
//!   and continuous-approximate semantics.
//! - [`kinematics`]: robot model, forward kinematics, family classification,
//!   and random robot/test-case generation.
//! - [`ik`]: the five closed-form solvers and the 1D/2D search solvers.

pub mod geom;
pub mod ik;
pub mod kinematics;
pub mod polyroot;
pub mod subproblems;

pub use geom::{Mat3, RotMat, UnitVec3, Vec3};
pub use ik::{solve, IkSolution, SolutionSet};
pub use kinematics::{FamilyTag, JointConfig, Kinematics, Pose};
