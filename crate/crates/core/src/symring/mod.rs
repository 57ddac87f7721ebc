//! Homogeneous symbol components, classical symbols, sphere grids.

pub mod component;
pub mod excision;
pub mod jet;
pub mod registry;
pub mod sphere;
pub mod symbol;
pub mod term;

pub use component::{GridComponent, HomogeneousComponent, Representation};
pub use excision::ExcisionProfile;
pub use jet::Jet;
pub use registry::ExactSymbol;
pub use sphere::SphereGrid;
pub use symbol::ClassicalSymbol;
pub use term::{Axis, SymbolTerm};
