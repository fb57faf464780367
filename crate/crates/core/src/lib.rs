//! Spatial content placement for device-to-device (D2D) caching networks.
//!
//! Caches sit on a homogeneous Poisson point process and a receiver is served
//! by any cache within the D2D radius that holds the requested file. Four
//! placement strategies are modelled:
//!
//! * **MPC** stores the `N` most popular files everywhere.
//! * **GCP** caches files independently with optimized marginals.
//! * **MHC-A** places each file by Matérn type-II thinning with an optimized
//!   per-file exclusion radius.
//! * **MHC-B** uses Matérn thinning whose retention matches the GCP marginals.
//!
//! The crate is split into the scenario description ([`scenario`]), numeric
//! kernels ([`numerics`]), closed-form hit probabilities and bounds
//! ([`analytic`]), placement optimizers ([`optimizers`]), a Monte Carlo engine
//! ([`simulator`]) and the experiment drivers used by the CLI
//! ([`experiments`]).

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod optimizers;
pub mod scenario;
pub mod simulator;

pub use analytic::{AnalyticBounds, PlacementKind, PlacementPolicy, UpperBoundMeasure};
pub use error::{Error, Result};
pub use optimizers::{GcpSolution, HcpSolution};
pub use scenario::{PopularityModel, ScenarioConfig};
pub use simulator::{HitEstimate, PointPattern, SimOptions, Strategy};
