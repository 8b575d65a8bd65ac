pub mod error;
pub mod geom;
pub mod hermite;
pub mod ph;
pub mod quadrature;
pub mod frames;
pub mod tracking;
pub mod pipeline;
pub mod io;
pub mod metrics;
pub mod bench;
