//! Probability law of the counting process N(t): mass function,
//! generating functions, moments, interarrival law and compound sums.

mod compound;
mod distribution;
mod interarrival;
mod moments;
mod spec;

pub use compound::{
    compound_mean, compound_mgf, DegenerateJump, ExponentialJump, JumpDistribution, NormalJump,
};
pub use distribution::{mgf, pgf, pmf, pmf_table, pmf_table_auto, survival_zero, PMFTable, AUTO_N_MAX};
pub use interarrival::{
    cumulative_rate, interarrival_cdf_quadrature, interarrival_laplace_quadrature,
    interarrival_laplace_series, interarrival_pdf, rate_function, AsymptoticSum,
};
pub use moments::{
    central_moment, central_moment_binomial, kurtosis_excess, mean, moment_set, raw_moment,
    skewness, variance, MomentSet, MAX_RAW_MOMENT,
};
pub use spec::ProcessSpec;
