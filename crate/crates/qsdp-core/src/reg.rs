//! Scalar regularizer pairs (φ, ψ = φ*, ψ′) and their trace-level evaluators.
//!
//! φ is convex, superlinear and bounded below on [0, ∞); ψ is its Legendre
//! conjugate on the real line, nondecreasing with ψ′ ≥ 0. Exponential ψ
//! evaluations are clamped at argument 700: beyond that the value is reported
//! as +∞, which the solver's line search treats as an overlong step.

use crate::error::Error;
use crate::herm::HermOp;

const EXP_ARG_MAX: f64 = 700.0;

/// Eigenvalues in [-1e-10, 0) are clamped to zero before φ is evaluated;
/// anything lower is a not-PSD error.
pub const PSD_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    /// φ(z) = z log z (φ(0) = 0), ψ(t) = e^{t−1}.
    VonNeumann,
    /// φ(z) = z (log z − 1), ψ(t) = e^t. Cross-check variant.
    VonNeumannShifted,
    /// φ(z) = z²/2, ψ(t) = max(t,0)²/2.
    Quadratic,
}

impl Regularizer {
    pub fn name(self) -> &'static str {
        match self {
            Regularizer::VonNeumann => "von_neumann",
            Regularizer::VonNeumannShifted => "von_neumann_shifted",
            Regularizer::Quadratic => "quadratic",
        }
    }

    /// CLI vocabulary: vn, vn-shifted, quad.
    pub fn cli_token(self) -> &'static str {
        match self {
            Regularizer::VonNeumann => "vn",
            Regularizer::VonNeumannShifted => "vn-shifted",
            Regularizer::Quadratic => "quad",
        }
    }

    pub fn from_cli_token(s: &str) -> Result<Self, Error> {
        match s {
            "vn" => Ok(Regularizer::VonNeumann),
            "vn-shifted" => Ok(Regularizer::VonNeumannShifted),
            "quad" => Ok(Regularizer::Quadratic),
            _ => Err(Error::InvalidInput(alloc::format!(
                "unknown regularizer '{s}', expected vn, vn-shifted or quad"
            ))),
        }
    }

    /// φ on [0, ∞). Callers clamp tiny negative eigenvalues first.
    pub fn phi(self, z: f64) -> f64 {
        match self {
            Regularizer::VonNeumann => {
                if z <= 0.0 {
                    0.0
                } else {
                    z * libm::log(z)
                }
            }
            Regularizer::VonNeumannShifted => {
                if z <= 0.0 {
                    0.0
                } else {
                    z * (libm::log(z) - 1.0)
                }
            }
            Regularizer::Quadratic => 0.5 * z * z,
        }
    }

    pub fn phi_at_zero(self) -> f64 {
        0.0
    }

    /// ψ = φ*; returns +∞ past the exp clamp.
    pub fn psi(self, t: f64) -> f64 {
        match self {
            Regularizer::VonNeumann => clamped_exp(t - 1.0),
            Regularizer::VonNeumannShifted => clamped_exp(t),
            Regularizer::Quadratic => {
                let r = t.max(0.0);
                0.5 * r * r
            }
        }
    }

    /// ψ′ ≥ 0; returns +∞ past the exp clamp.
    pub fn psi_prime(self, t: f64) -> f64 {
        match self {
            Regularizer::VonNeumann => clamped_exp(t - 1.0),
            Regularizer::VonNeumannShifted => clamped_exp(t),
            Regularizer::Quadratic => t.max(0.0),
        }
    }

    pub fn inf_psi(self) -> f64 {
        0.0
    }

    /// Whether ψ is strictly convex (the quadratic conjugate is flat on t < 0).
    pub fn strictly_convex_psi(self) -> bool {
        !matches!(self, Regularizer::Quadratic)
    }

    /// Tr[φ(π)] over the clamped spectrum of a PSD operator.
    pub fn trace_phi(self, pi: &HermOp) -> Result<f64, Error> {
        let sd = pi.spectral_decompose();
        let mut acc = 0.0;
        for &l in sd.eigenvalues() {
            if l < -PSD_CLAMP {
                return Err(Error::NotPsd { min_eigenvalue: l });
            }
            acc += self.phi(l.max(0.0));
        }
        Ok(acc)
    }

    /// Tr[ψ(W)] = Σ ψ(λᵢ(W)); +∞ when any eigenvalue overflows the clamp.
    pub fn trace_psi(self, w: &HermOp) -> f64 {
        w.spectral_decompose()
            .eigenvalues()
            .iter()
            .map(|&l| self.psi(l))
            .sum()
    }

    /// Spectral lift of ψ′; PSD since ψ′ ≥ 0.
    pub fn psi_prime_lift(self, w: &HermOp) -> HermOp {
        w.spectral_decompose().apply(|l| self.psi_prime(l))
    }

    /// Tr[φ(π)] + Tr[ψ(W)] − Tr[Wπ]; nonnegative up to roundoff, zero exactly
    /// when π = ψ′(W).
    pub fn fenchel_young_gap(self, pi: &HermOp, w: &HermOp) -> Result<f64, Error> {
        let phi = self.trace_phi(pi)?;
        let psi = self.trace_psi(w);
        let inner = w.trace_inner(pi)?;
        Ok(phi + psi - inner)
    }
}

fn clamped_exp(arg: f64) -> f64 {
    if arg > EXP_ARG_MAX {
        f64::INFINITY
    } else {
        libm::exp(arg)
    }
}
