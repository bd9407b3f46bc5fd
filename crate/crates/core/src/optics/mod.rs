//! Path-encoded photonic detection chain.

pub mod detector;
pub mod fields;
pub mod film;
pub mod geometry;
pub mod pgm;
pub mod profile;

pub use detector::{render_frame, DetectorFrame, DetectorSpec, Field, FnField};
pub use fields::{FringeField, ImageField};
pub use film::frame_sequence;
pub use geometry::{fringe_intensity, image_intensity, ModeGeometry};
pub use profile::{itop, Itop, Profile, ProfileAxis};
