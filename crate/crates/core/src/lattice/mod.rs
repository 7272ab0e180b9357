//! Lattice geometry, collision enumeration and collision tables.

mod classes;
mod descriptor;
mod multiset;
mod table;

pub use classes::{enumerate_equivalence_classes, write_class_table_csv, Collision, EquivalenceClass};
pub use descriptor::{build_descriptor, LatticeDescriptor, Model, CS2, MAX_Q};
pub use multiset::Multiset;
pub use table::{CollisionTable, CollisionTerm, Multiplicity};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("unknown lattice model `{0}`")]
    UnknownModel(String),
    #[error("unsupported collision order k={0} (expected 2, 3 or 4)")]
    UnsupportedK(usize),
    #[error("rate vector has {got} entries, lattice needs {expected}")]
    LambdaLength { expected: usize, got: usize },
    #[error("negative or non-finite rate: {0}")]
    BadRate(f64),
    #[error("negative or non-finite collision scale C={0}")]
    BadScale(f64),
    #[error("classes were enumerated for {found}, table requested for {expected}")]
    ModelMismatch { expected: Model, found: Model },
}
