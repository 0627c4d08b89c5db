//! Gamma-ratio coefficients, the Kilbas–Saigo function and Mittag-Leffler functions.

mod gamma;
mod kilbas_saigo;
mod mittag_leffler;
mod params;
pub(crate) mod series;

pub use gamma::{ln_gamma_ratio, log_gamma};
pub use kilbas_saigo::{
    kilbas_saigo, kilbas_saigo_deriv, kilbas_saigo_deriv_detailed, kilbas_saigo_one_minus, ks_coeff_ratio_check, ks_series_coeff,
    ks_series_coeff_detailed, SeriesCoeff,
};
pub use mittag_leffler::{mittag_leffler, mittag_leffler2};
pub use params::FractalityParams;
pub use series::{SeriesConfig, SeriesValue};

pub(crate) use gamma::log_gamma_unchecked;
pub(crate) use kilbas_saigo::scaled_deriv;
