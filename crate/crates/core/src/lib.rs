//! Capped-precision p-adic algebra for locally analytic period-ring models.
//!
//! The crate is organised bottom-up:
//!
//! * [`padic`]: elements of `Q_p` and unramified extensions, log/exp, Teichmüller lifts;
//! * [`series`], [`newton`], [`formal`], [`anticyclo`]: truncated power series, Newton
//!   polygons, Lubin–Tate series and the two-variable kernel computation;
//! * [`cyclotomic`]: the fields `Q_p(zeta_{p^m})` with the cyclotomic Galois action;
//! * [`bdr`], [`sen`]: the truncated `K_m[[t]]` model and Sen operators;
//! * [`uadj`]: power series in an adjoined variable `u` with the twisted action;
//! * [`phi`]: (phi, nabla)-modules over truncated entire series in `x`;
//! * [`refine`]: filtered phi-modules, refinements and their lattices.

pub mod anticyclo;
pub mod bdr;
pub mod cyclotomic;
pub mod error;
pub mod formal;
mod fp_poly;
pub mod linalg;
pub mod newton;
pub mod padic;
pub mod phi;
pub mod refine;
pub mod ring;
pub mod roots;
pub mod sen;
pub mod series;
pub mod uadj;
pub mod valuation;

pub use error::{Error, ErrorKind, Result};
pub use linalg::Matrix;
pub use padic::{PadicElement, PadicField};
pub use ring::RingElem;
pub use valuation::Valuation;
