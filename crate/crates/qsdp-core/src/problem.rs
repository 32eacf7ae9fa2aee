//! The variational problem data model: validation, feasibility certification,
//! primal/dual functionals, dual gradient, primal recovery and
//! zero-temperature diagnostics.
//!
//! Primal:  F(π) = Tr[Hπ] + ε·Tr[φ(π)] over admissible π ⪰ 0 with
//! Tr[Qᵢπ] = qᵢ. Dual: D(α) = Σ αᵢqᵢ − ε·Tr[ψ(W/ε)] with
//! W = Σ αᵢQᵢ − H, maximized unconstrained; ∂D/∂αⱼ = qⱼ − Tr[Qⱼ ψ′(W/ε)]
//! and the primal optimizer is recovered as π = ψ′(W/ε).

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::herm::HermOp;
use crate::reg::Regularizer;

/// Rank threshold for the real Gram matrix: singular values below
/// `1e-10 · σ_max` count as zero.
const GRAM_RTOL: f64 = 1e-10;

/// Consistency tolerance for dependent outcomes: |q_j − Σ tᵢqᵢ| ≤ 1e-8(1+|q_j|).
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    hamiltonian: HermOp,
    observables: Vec<HermOp>,
    outcomes: Vec<f64>,
    epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    DimensionMismatch {
        index: usize,
        dim: usize,
        expected: usize,
    },
    ObservableCountMismatch {
        observables: usize,
        outcomes: usize,
    },
    NoObservables,
    Q0NotPositiveDefinite {
        min_eigenvalue: f64,
    },
    Q0OutcomeNotPositive {
        q0: f64,
    },
    NonPositiveEpsilon {
        epsilon: f64,
    },
    NonFiniteOutcome {
        index: usize,
        value: f64,
    },
}

impl core::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ValidationIssue::DimensionMismatch {
                index,
                dim,
                expected,
            } => write!(f, "observable {index} has dim {dim}, expected {expected}"),
            ValidationIssue::ObservableCountMismatch {
                observables,
                outcomes,
            } => write!(f, "{observables} observables but {outcomes} outcomes"),
            ValidationIssue::NoObservables => write!(f, "at least one observable (Q0) required"),
            ValidationIssue::Q0NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "Q0 must be positive definite, min eigenvalue {min_eigenvalue:.3e}"
            ),
            ValidationIssue::Q0OutcomeNotPositive { q0 } => {
                write!(f, "q0 must be positive, got {q0}")
            }
            ValidationIssue::NonPositiveEpsilon { epsilon } => {
                write!(f, "epsilon must be positive, got {epsilon}")
            }
            ValidationIssue::NonFiniteOutcome { index, value } => {
                write!(f, "outcome {index} is not finite: {value}")
            }
        }
    }
}

impl ProblemInstance {
    pub fn new(
        hamiltonian: HermOp,
        observables: Vec<HermOp>,
        outcomes: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self, Error> {
        let inst = Self {
            hamiltonian,
            observables,
            outcomes,
            epsilon,
        };
        match inst.validate() {
            Ok(()) => Ok(inst),
            Err(issues) => {
                let mut msg = String::new();
                for (k, issue) in issues.iter().enumerate() {
                    if k > 0 {
                        msg.push_str("; ");
                    }
                    msg.push_str(&alloc::format!("{issue}"));
                }
                Err(Error::InvalidInstance(msg))
            }
        }
    }

    /// Checks every type invariant, reporting all violations.
    pub fn validate(&self) -> Result<(), Vec<ValidationIssue>> {
        let mut issues = Vec::new();
        let d = self.hamiltonian.dim();
        if self.observables.is_empty() {
            issues.push(ValidationIssue::NoObservables);
        }
        if self.observables.len() != self.outcomes.len() {
            issues.push(ValidationIssue::ObservableCountMismatch {
                observables: self.observables.len(),
                outcomes: self.outcomes.len(),
            });
        }
        for (i, q) in self.observables.iter().enumerate() {
            if q.dim() != d {
                issues.push(ValidationIssue::DimensionMismatch {
                    index: i,
                    dim: q.dim(),
                    expected: d,
                });
            }
        }
        for (i, &v) in self.outcomes.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::NonFiniteOutcome { index: i, value: v });
            }
        }
        if issues.is_empty() {
            let min = self.observables[0].min_eigenvalue();
            if min <= 0.0 {
                issues.push(ValidationIssue::Q0NotPositiveDefinite {
                    min_eigenvalue: min,
                });
            }
            if self.outcomes[0] <= 0.0 {
                issues.push(ValidationIssue::Q0OutcomeNotPositive {
                    q0: self.outcomes[0],
                });
            }
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            issues.push(ValidationIssue::NonPositiveEpsilon {
                epsilon: self.epsilon,
            });
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Number of constraints beyond Q0.
    pub fn num_extra_constraints(&self) -> usize {
        self.observables.len() - 1
    }

    pub fn hamiltonian(&self) -> &HermOp {
        &self.hamiltonian
    }

    pub fn observables(&self) -> &[HermOp] {
        &self.observables
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// Trace bound t₀ = q₀ / λ₁(Q₀) on every admissible state.
    pub fn trace_bound(&self) -> f64 {
        self.outcomes[0] / self.observables[0].min_eigenvalue()
    }

    pub fn feasibility_certificate(&self) -> Result<FeasibilityCertificate, Error> {
        feasibility_certificate(&self.observables, &self.outcomes)
    }

    /// Reports λ₁(π₀) and the worst constraint residual of a Slater candidate.
    pub fn slater_diagnostic(&self, candidate: &HermOp) -> Result<SlaterDiagnostic, Error> {
        if candidate.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: candidate.dim(),
                right: self.dim(),
            });
        }
        let min_eigenvalue = candidate.min_eigenvalue();
        let residual_norm = self
            .constraint_residuals(candidate)?
            .iter()
            .fold(0.0f64, |acc, r| acc.max(r.abs()));
        Ok(SlaterDiagnostic {
            candidate: candidate.clone(),
            min_eigenvalue,
            residual_norm,
        })
    }

    /// F(π) = Tr[Hπ] + ε Tr[φ(π)].
    pub fn primal_value(&self, reg: Regularizer, pi: &HermOp) -> Result<f64, Error> {
        let energy = self.hamiltonian.trace_inner(pi)?;
        let entropy = reg.trace_phi(pi)?;
        Ok(energy + self.epsilon * entropy)
    }

    /// W(α) = Σ αᵢQᵢ − H.
    pub fn dual_effective(&self, alpha: &[f64]) -> Result<HermOp, Error> {
        if alpha.len() != self.observables.len() {
            return Err(Error::DimensionMismatch {
                left: alpha.len(),
                right: self.observables.len(),
            });
        }
        let combo = HermOp::linear_combination(&self.observables, alpha)?;
        combo.sub(&self.hamiltonian)
    }

    /// D(α) = Σ αᵢqᵢ − ε Tr[ψ(W/ε)]; −∞ when ψ overflows.
    pub fn dual_value(&self, reg: Regularizer, alpha: &[f64]) -> Result<f64, Error> {
        Ok(self.dual_value_and_gradient(reg, alpha)?.0)
    }

    /// ∂D/∂αⱼ = qⱼ − Tr[Qⱼ ψ′(W/ε)].
    pub fn dual_gradient(&self, reg: Regularizer, alpha: &[f64]) -> Result<Vec<f64>, Error> {
        Ok(self.dual_value_and_gradient(reg, alpha)?.1)
    }

    /// Joint evaluation sharing a single spectral decomposition of W/ε.
    /// On ψ overflow, returns (−∞, zero gradient).
    pub fn dual_value_and_gradient(
        &self,
        reg: Regularizer,
        alpha: &[f64],
    ) -> Result<(f64, Vec<f64>), Error> {
        let w = self.dual_effective(alpha)?;
        let sd = w.scaled(1.0 / self.epsilon).spectral_decompose();
        let trace_psi: f64 = sd.eigenvalues().iter().map(|&l| reg.psi(l)).sum();
        let linear: f64 = alpha.iter().zip(&self.outcomes).map(|(a, q)| a * q).sum();
        let value = linear - self.epsilon * trace_psi;
        if !value.is_finite() {
            return Ok((f64::NEG_INFINITY, alloc::vec![0.0; alpha.len()]));
        }
        let lifted = sd.apply(|l| reg.psi_prime(l));
        let mut grad = Vec::with_capacity(alpha.len());
        for (qop, &q) in self.observables.iter().zip(&self.outcomes) {
            grad.push(q - qop.trace_inner(&lifted)?);
        }
        Ok((value, grad))
    }

    /// π(α) = ψ′(W/ε); PSD since ψ′ ≥ 0.
    pub fn recover_primal(&self, reg: Regularizer, alpha: &[f64]) -> Result<HermOp, Error> {
        let w = self.dual_effective(alpha)?;
        Ok(reg.psi_prime_lift(&w.scaled(1.0 / self.epsilon)))
    }

    /// Component i: Tr[Qᵢπ] − qᵢ.
    pub fn constraint_residuals(&self, pi: &HermOp) -> Result<Vec<f64>, Error> {
        let mut res = Vec::with_capacity(self.observables.len());
        for (qop, &q) in self.observables.iter().zip(&self.outcomes) {
            res.push(qop.trace_inner(pi)? - q);
        }
        Ok(res)
    }

    /// ‖√π (H − Σ αᵢQᵢ) √π‖_F via the spectral square root.
    pub fn slackness_residual(&self, pi: &HermOp, alpha: &[f64]) -> Result<f64, Error> {
        let root = pi.sqrt_psd()?;
        // H − Σ αQ = −W
        let inner = self.dual_effective(alpha)?.scaled(-1.0);
        let d = pi.dim();
        let tmp = crate::herm::matmul(root.entries(), inner.entries(), d);
        let out = crate::herm::matmul(&tmp, root.entries(), d);
        Ok(libm::sqrt(out.iter().map(|z| z.norm_sqr()).sum()))
    }

    /// Margin λ₁(H − Σ αᵢQᵢ); feasible for the zero-temperature dual iff the
    /// margin is ≥ −tol.
    pub fn zero_temp_dual_feasible(
        &self,
        alpha: &[f64],
        tol: f64,
    ) -> Result<ZeroTempFeasibility, Error> {
        let w = self.dual_effective(alpha)?;
        let margin = w.scaled(-1.0).min_eigenvalue();
        Ok(ZeroTempFeasibility {
            margin,
            feasible: margin >= -tol,
        })
    }
}

/// Samples ε ↦ ε·Tr[ψ(W/ε)]; +∞ entries mark exp overflow.
pub fn gamma_probe(reg: Regularizer, w: &HermOp, eps_list: &[f64]) -> Vec<(f64, f64)> {
    eps_list
        .iter()
        .map(|&eps| {
            let v = eps * reg.trace_psi(&w.scaled(1.0 / eps));
            (eps, v)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SlaterDiagnostic {
    pub candidate: HermOp,
    /// ω₀ = λ₁(π₀); the Slater condition needs ω₀ > 0.
    pub min_eigenvalue: f64,
    /// max_i |Tr[Qᵢπ₀] − qᵢ|.
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroTempFeasibility {
    pub margin: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct FeasibilityCertificate {
    /// Indices of a maximal linearly independent subset of the observables.
    pub basis_indices: Vec<usize>,
    /// For each dependent observable j: Q_j = Σ coeffs[k] · Q_{basis[k]}.
    pub dependents: Vec<DependentRelation>,
    pub verdict: FeasibilityVerdict,
}

#[derive(Debug, Clone)]
pub struct DependentRelation {
    pub index: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum FeasibilityVerdict {
    /// A sign-unconstrained Hermitian witness with Tr[Qᵢ·witness] = qᵢ for all
    /// i. This certifies only the necessary linear-consistency condition; it
    /// does not decide PSD feasibility.
    Feasible { witness: HermOp },
    Inconsistent {
        violated_index: usize,
        lhs: f64,
        rhs: f64,
    },
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible { .. })
    }
}

/// Selects a maximal linearly independent subset of the observables via the
/// real Gram matrix Gᵢⱼ = Tr[QᵢQⱼ], expresses each dependent observable in
/// that basis, checks outcome consistency, and when consistent solves the
/// Gram system for a Hermitian (sign-unconstrained) witness.
pub fn feasibility_certificate(
    observables: &[HermOp],
    outcomes: &[f64],
) -> Result<FeasibilityCertificate, Error> {
    if observables.is_empty() || observables.len() != outcomes.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "certificate needs matching nonempty lists, got {} observables and {} outcomes",
            observables.len(),
            outcomes.len()
        )));
    }
    let m = observables.len();
    let dim = observables[0].dim();
    for q in observables {
        if q.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: q.dim(),
                right: dim,
            });
        }
    }

    let mut gram = alloc::vec![0.0f64; m * m];
    for i in 0..m {
        for j in i..m {
            let g = observables[i].trace_inner(&observables[j])?;
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let sigma_max = symmetric_max_eigenvalue(&gram, m).max(f64::MIN_POSITIVE);
    let threshold = GRAM_RTOL * sigma_max;

    // Greedy scan in index order with modified Gram-Schmidt in operator space.
    let mut basis_indices: Vec<usize> = Vec::new();
    let mut ortho: Vec<HermOp> = Vec::new();
    for j in 0..m {
        let mut r = observables[j].clone();
        for b in &ortho {
            let c = b.trace_inner(&r)?;
            r = r.sub(&b.scaled(c))?;
        }
        let r2 = r.trace_inner(&r)?;
        if r2 > threshold {
            basis_indices.push(j);
            ortho.push(r.scaled(1.0 / libm::sqrt(r2)));
        }
    }

    // Basis Gram block and its Cholesky factor.
    let k = basis_indices.len();
    let mut gb = alloc::vec![0.0f64; k * k];
    for (a, &ia) in basis_indices.iter().enumerate() {
        for (b, &ib) in basis_indices.iter().enumerate() {
            gb[a * k + b] = gram[ia * m + ib];
        }
    }
    let chol = cholesky(&gb, k).ok_or_else(|| {
        Error::InvalidInput("Gram matrix of the selected basis is singular".into())
    })?;

    let mut dependents = Vec::new();
    let mut verdict: Option<FeasibilityVerdict> = None;
    for j in 0..m {
        if basis_indices.contains(&j) {
            continue;
        }
        let rhs: Vec<f64> = basis_indices.iter().map(|&i| gram[i * m + j]).collect();
        let coeffs = cholesky_solve(&chol, &rhs, k);
        let predicted: f64 = coeffs
            .iter()
            .zip(&basis_indices)
            .map(|(t, &i)| t * outcomes[i])
            .sum();
        if verdict.is_none()
            && (outcomes[j] - predicted).abs() > CONSISTENCY_TOL * (1.0 + outcomes[j].abs())
        {
            verdict = Some(FeasibilityVerdict::Inconsistent {
                violated_index: j,
                lhs: outcomes[j],
                rhs: predicted,
            });
        }
        dependents.push(DependentRelation { index: j, coeffs });
    }

    let verdict = match verdict {
        Some(v) => v,
        None => {
            let rhs: Vec<f64> = basis_indices.iter().map(|&i| outcomes[i]).collect();
            let c = cholesky_solve(&chol, &rhs, k);
            let basis_ops: Vec<HermOp> = basis_indices
                .iter()
                .map(|&i| observables[i].clone())
                .collect();
            let witness = HermOp::linear_combination(&basis_ops, &c)?;
            FeasibilityVerdict::Feasible { witness }
        }
    };

    Ok(FeasibilityCertificate {
        basis_indices,
        dependents,
        verdict,
    })
}

fn symmetric_max_eigenvalue(a: &[f64], n: usize) -> f64 {
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i * n + j]);
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &x| acc.max(x))
}

/// Dense lower Cholesky of a small SPD matrix; None when not PD.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut y = alloc::vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = alloc::vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}
