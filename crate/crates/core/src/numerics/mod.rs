//! Numerical building blocks shared by every other module.

mod eigen;
mod quadrature;
mod rng;
mod special;
mod truncnorm;

pub use eigen::{jacobi_eigen, symmetric_eigen, SymmetricEigen};
pub use quadrature::{integrate, QuadratureSpec};
pub use rng::RngStream;
pub use special::{
    binary_entropy, normal_interval_mass, std_normal_cdf, std_normal_cdf_inv, std_normal_pdf,
    std_normal_sf,
};
pub use truncnorm::sample_truncated_std_normal;
