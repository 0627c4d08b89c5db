//! Stirling numbers, fractional combinatorial numbers and the
//! Stirling-number representations of the Kilbas–Saigo function.

mod fractional;
mod identities;
mod stirling;

pub use fractional::{frac_comb_number, frac_number, frac_polynomial, poly_genfun, FracCombTable};
pub use identities::{ks_identity_sides, ks_identity_sides_double, ks_via_stirling};
pub use stirling::{stirling1_signed, stirling2, StirlingCache};
pub use rug::Integer;
