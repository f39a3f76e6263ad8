//! Copula-based ARMA-type time series: pair-copula families, stationary and
//! moving-aggregate D-vines, the latent-AR / q-dependent output process,
//! likelihood, forecasting and dependence diagnostics.

pub mod coarma;
pub mod copula;
pub mod dependence;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod garch_link;
pub mod gaussian_equiv;
pub mod margins;
pub mod model;
pub mod optim;
pub mod quadrature;
pub mod rng;
pub mod roots;
pub mod special;
pub mod stats;
pub mod vine;

pub use coarma::{CoarmaSpec, ForecastGrid};
pub use copula::{CopulaSpec, Family, ReciprocalVariant, Rotation};
pub use error::{CoarmaError, Result};
pub use margins::{MarginKind, MarginModel};
pub use model::ModelTemplate;
pub use vine::{VineKind, VineSpec};
