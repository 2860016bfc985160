//! Combinatorial resolution of singularities for embedded toric schemes over
//! the integers: binomial ideals on the charts of a regular fan, improved by
//! iterated star-subdivision blow-ups whose centres come from derivative
//! loci, standard bases, and Hilbert–Samuel strata.

pub mod binomial;
pub mod blowup;
pub mod error;
pub mod fan;
pub mod hasse;
pub mod hilbert;
pub mod marked;
pub mod matrix;
pub mod resolve;
pub mod standard_basis;
pub mod strata;

pub use binomial::{ChartBinomial, ChartFrame, ChartIdeal, EmbeddingState, TorusLattice};
pub use blowup::{blow_up, BlowUpOutcome};
pub use error::{EngineError, Result};
pub use fan::{star_subdivision, RegularFan, StarSubdivision};
pub use hasse::{
    global_invariant, glue_hasse_ideal, hasse_locus_components, resolve_hypersurface,
    GlobalInvariant, InvariantTriple, ResolutionStep, ResolutionTrace,
};
pub use hilbert::{compare_hs, hs_at_distinguished, HsComparison, HsFunction, HsStalk};
pub use marked::{assemble_marked_ideal, MarkedMonomialIdeal};
pub use resolve::{resolve_general, GeneralStep, GeneralTrace};
pub use standard_basis::{standard_basis, CompletionCaps, StandardBasis};
