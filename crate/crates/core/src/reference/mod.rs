//! Independent reference solutions and error metrics.

pub mod cole_hopf;
pub mod fd;
pub mod metrics;
pub mod quadrature;

pub use cole_hopf::{burgers_cole_hopf, ColeHopf};
pub use fd::{darcy_forward_fd, eikonal_reference, fd_poisson, sample_grid, ReferenceGrid};
pub use metrics::{error_from_values, error_metrics, test_grid};
pub use quadrature::gauss_hermite;
