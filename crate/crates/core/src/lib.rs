//! Cyclopean geometry of binocular fixation.
//!
//! A fixating pair of eyes is described by the Helmholtz coordinates of the
//! fixation point. From them follow the eye poses, the horopter, an Essential
//! matrix assembled from the epipoles and the midline horopter image, and a
//! symmetric parallax model that expresses each correspondence through a
//! single plane-relative depth. The [`estimation`] module inverts the model,
//! and [`sim`] drives synthetic experiments for the command-line tool.

pub mod disparity;
pub mod epipolar;
pub mod error;
pub mod estimation;
pub mod geom;
pub mod horopter;
pub mod oculomotor;
pub mod sim;

pub use error::{Error, Result};
pub use geom::{HomogLine2, HomogPoint2, Mat3, Rot3, Vec3};
pub use oculomotor::{Eye, EyeAzimuths, GazeState, VergenceVersion, ViethMullerCircle};
