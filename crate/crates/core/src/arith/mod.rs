//! Exact arithmetic kernel: primality, budgeted factorization, and the
//! multiplicative functions everything else is built on.

mod ecm;
pub mod factor;
pub mod factorization;
pub mod functions;
pub mod primality;
pub mod ratio;

pub use factor::{decimal_digits, factor, factor_metered, factor_u64, Budget, WorkMeter, TRIAL_BOUND};
pub use factorization::{Factorization, PrimePower};
pub use functions::{
    abundancy, abundancy_bounds, aliquot, is_squarefree, l_invariant, omega, sigma, sigma_pow, sigma_pow_prime_power,
    sigma_prime_power, tau,
};
pub use primality::{is_prime, is_prime_u64};
pub use ratio::ExactRatio;
