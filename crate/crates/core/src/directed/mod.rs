//! Directed holomorphic curves: cone-valued derivative maps, periods over
//! lattice cycles, period correction by sprays, path integration and
//! minimal-surface diagnostics.

mod cone;
mod immersion;
mod integrate;
mod minimal;
mod periods;
mod spray;

pub use cone::{check_cone_membership, ConeReport, ConeSpec, Generator};
pub use immersion::{immersion_family, subharmonic_exhaustion, Exhaustion, ImmersionFamily};
pub use integrate::{integrate_primitive, Primitive};
pub use minimal::{
    export_meshes, flatness, minimal_immersion_family, partials4, MinimalDiagnostics, MinimalFiber, MinimalOptions,
    NullCurveBundle, FLATNESS_TOL, MEMBERSHIP_TOL,
};
pub use periods::{auto_cycles, period_map, HomologyCycle};
pub use spray::{
    build_period_spray, kill_periods, monomial_multipliers, PeriodCorrection, PeriodMode, PeriodSpray,
    DEFAULT_DOMINATION_THRESHOLD, DEFAULT_FLOW_RADIUS, MAX_HALVINGS,
};
