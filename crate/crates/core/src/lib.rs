//! Numerical engine for the loop space `L(M)` and path space `P(M)` of
//! built-in Riemannian manifolds.
//!
//! Curves are sampled (`curve`), transported (`transport`), and the
//! Atiyah forms (`forms`), the almost complex structure on based loops
//! (`acs`) and the Liouville/contact/Reeb structures (`contact`) are
//! evaluated on them. `suite` runs the registered checks and produces
//! reports; `io` handles the CSV and report formats.

pub mod acs;
pub mod checks;
pub mod contact;
pub mod curve;
pub mod error;
pub mod forms;
pub mod io;
pub mod manifold;
pub mod spectral;
pub mod suite;
pub mod transport;

pub use error::{GeomError, Result};
