//! Waiting-time processes of infinite-measure-preserving interval maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactreal`] produces continued-fraction digit streams exactly, from
//!   closed descriptions, rationals, or lazily refined random dyadic reals.
//!   [`digitchain`] is a fast sampler with the same digit law under Lebesgue
//!   measure, used for large horizons.
//! * [`maps`] holds the Farey, Lasota–Yorke, Thaler (α = 0) and Gauss maps,
//!   their inverse branches and the Farey wandering-rate closed forms.
//! * [`processes`] computes visit times and the waiting-time processes
//!   `Z_n`, `Y_n`, `V_n` by a digit engine and by orbit engines.
//! * [`distort`] evaluates the distorted processes Λ, Γ, Δ, Θ.
//! * [`limits`] evaluates the analytic limit laws (densities, CDFs, rate
//!   functions), backed by the adaptive quadrature in [`quad`].
//! * [`renewal`] is the heavy-tailed renewal surrogate for general α.
//! * [`cf`] contains the continued-fraction processes ψ_n and σ_n.
//! * [`stats`] provides empirical CDFs, KS distances and interval estimates.
//! * [`experiments`] wires everything into reproducible, seeded runs.

pub mod cf;
pub mod ddouble;
pub mod digitchain;
pub mod distort;
pub mod exactreal;
pub mod experiments;
pub mod limits;
pub mod maps;
pub mod processes;
pub mod quad;
pub mod renewal;
pub mod sampling;
pub mod stats;

pub use exactreal::{DigitError, DigitStream, Digits};
pub use limits::{LawKind, LimitLaw};
pub use maps::{MapDescriptor, MapKind, WanderingSequence};
pub use processes::{VisitTimes, WaitingRecord};
