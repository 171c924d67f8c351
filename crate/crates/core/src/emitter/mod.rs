//! Phenomenological quantum-emitter analytics: Zeeman-split exciton lines,
//! coupling efficiency, photon streams and second-order correlations.

pub mod beta;
pub mod g2;
pub mod io;
pub mod stream;
pub mod zeeman;

pub use beta::*;
pub use g2::*;
pub use io::*;
pub use stream::*;
pub use zeeman::*;
