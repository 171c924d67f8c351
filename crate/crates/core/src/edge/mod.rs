//! Ribbon supercells containing both interfaces between the two crystals,
//! their projected bands and the character of the in-gap edge modes.

mod analysis;
mod io;
mod projected;
mod summary;
mod supercell;

pub use analysis::*;
pub use io::*;
pub use projected::*;
pub use summary::*;
pub use supercell::*;
