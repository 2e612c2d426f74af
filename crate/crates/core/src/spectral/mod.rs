//! Periodic pseudo-spectral discretization on the torus of side `2πL`.

pub mod field;
pub mod grid;
pub mod jet;
pub mod ops;
pub mod random;
pub mod snapshot;

pub use field::SpectralField;
pub use grid::{TorusGrid, DEFAULT_DEALIAS_FRACTION};
pub use ops::{advection, bessel_weight, commutator_js, dealiased_product, tail_energy, DEFAULT_TAIL_THRESHOLD};
pub use jet::PhysicalJet;
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot};
