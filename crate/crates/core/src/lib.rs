//! Numerical toolkit for the variational stability of radially symmetric
//! planar vortices: weight functions, Hardy constants, operator spectra,
//! energy functionals and a viscous perturbation simulator.

pub mod energy;
pub mod error;
pub mod evolve;
pub mod forms;
pub mod grid;
pub mod profiles;
pub mod sampling;
pub mod special;
pub mod spectral;
pub mod tridiag;
pub mod verify;

pub use error::{LabError, Result};
pub use rustfft::num_complex::Complex64;
pub use grid::{make_grid, moments, GridSpec, project_constraints, Constraint, Mapping, Moments, PolarField, RadialGrid};
pub use profiles::{eval_gaussian_bw, make_profile, ProfileKind, ProfileSpec, VortexProfile};
pub use spectral::{
    bk_apply, btilde1_spectrum, coercivity_bound, hardy_constant, kernel_index, kernel_threshold, lk_spectrum, quasimode_analysis,
    rayleigh_mu1_bounds, vsign_hardy_check, HardyOrdering, SpectralReport,
};
pub use evolve::{run, EvolState, Evolver, PerturbationSpec, RunConfig, TrajectoryLog};
pub use forms::{
    delta_estimate, form_values, gamma_estimate, grad_norm_sq, j_form, n_form, q_form, x_norm_sq, DeltaEstimate,
    FormValues, GammaEstimate, RadialSector,
};
pub use energy::{
    energy_modes, energy_radial, energy_via_h, entropy_catalog, free_energy, log_hls_gap, maximize_free_energy, rearrange,
    ConstraintProfile, EntropyFunction, EntropyKind, Maximizer,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/profiles.md")]
    struct Profiles;
    #[doc = include_str!("../../../book/src/grids.md")]
    struct Grids;
    #[doc = include_str!("../../../book/src/spectral.md")]
    struct Spectral;
    #[doc = include_str!("../../../book/src/forms.md")]
    struct Forms;
    #[doc = include_str!("../../../book/src/energy.md")]
    struct Energy;
    #[doc = include_str!("../../../book/src/evolve.md")]
    struct Evolve;
    #[doc = include_str!("../../../book/src/verify.md")]
    struct Verify;
}
