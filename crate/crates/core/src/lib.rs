//! Exponential sums `S_m(z) = Σ_{f(x,y) ≡ 0 mod p^m} Ψ(z·g(x,y))` over the
//! points of a plane curve mod `p^m`, with the invariants governing their decay.
//!
//! The modules build on each other in order:
//! [`padic`] for residues, valuations and the additive character,
//! [`poly`] and [`series`] for polynomials and truncated power series,
//! [`hensel`] for branch parametrizations,
//! [`enumerate`] for point sets mod `p^m`,
//! [`expsum`] for the sums themselves,
//! [`analysis`] for `L`, `μ`, `σ` and the decay fit.

pub mod analysis;
pub mod enumerate;
pub mod error;
pub mod expsum;
pub mod hensel;
pub mod padic;
pub mod poly;
pub mod round_sig;
pub mod series;

pub use analysis::{
    c_of_f, decay_fit, mu_at_point, neron_l, sigma_fg, sigma_onevar, DecayReport, MuValue,
    NeronL, SigmaCertificate, Verdict,
};
pub use enumerate::{brute_points, count_report, lift_points, Method, PointSet};
pub use error::{Error, Result};
pub use expsum::{sum_curve, sum_onevar, sum_parametric, PhaseSpec, SumRecord};
pub use hensel::{hensel_param, rescale_srp, Branch, CurvePoint};
pub use padic::{char_eval, PadicContext, Residue, Valuation};
pub use poly::BiPoly;
pub use series::TruncSeries;
