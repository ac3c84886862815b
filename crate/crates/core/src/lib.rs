pub mod error;
pub mod floors;
pub mod geodata;
pub mod geom;
pub mod index;
pub mod lod1;
pub mod morphometry;
pub mod pipeline;
pub mod regression;
pub mod streets;
pub mod svi;
pub mod synth;

pub use error::{Error, Result};
