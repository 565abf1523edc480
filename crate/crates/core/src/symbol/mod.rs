//! Symbol calculus for the square of the two-sheeted Dirac operator.

pub mod gamma;
pub mod jet;
pub mod parametrix;
pub mod printed;
pub mod quadrature;
pub mod symbols;
pub mod wres;

pub use gamma::{gamma_basis, GammaSet, Mat8, C64};
pub use parametrix::{composition_defect, parametrix, parametrix_with, Calculus, Parametrix};
pub use quadrature::{cosphere_integrate, CosphereRule, DEFAULT_NODES};
pub use symbols::{build_symbols, Covector, MatrixSymbol, SymbolSet};
pub use wres::{wres_b2_term, wres_volume_term, B2Terms};
