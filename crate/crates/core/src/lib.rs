pub mod curve;
pub mod elastica;
pub mod elliptic;
pub mod error;
pub mod feedback;
pub mod fit;
pub mod geom;
pub mod harness;
pub mod optim;
pub mod quad;
pub mod residual;
pub mod zone;
