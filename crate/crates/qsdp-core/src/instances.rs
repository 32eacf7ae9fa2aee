//! Generators for the experiment families: state tomography with random Pauli
//! observables, quantum optimal transport between quadrature-discretized
//! Gaussian states or Ising ground-state marginals, and the two-dimensional
//! instance whose dual has no maximizer.
//!
//! Generation is pure given (spec, seed); randomness flows through an
//! explicit seeded ChaCha stream, never global state.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::herm::{HermOp, Subsystem, C64};
use crate::problem::ProblemInstance;
use crate::states::{
    cat_state, fock_quadratures, gaussian_fock_density, pauli_string, zeta_state, Pauli,
};

/// Typed instance description; same spec and seed always produce the same
/// [`ProblemInstance`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub family: InstanceFamily,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceFamily {
    Qt1 {
        n_qubits: usize,
        p: f64,
        theta: f64,
        omega: f64,
        /// Observable count; 2·2ⁿ when absent.
        count: Option<usize>,
        epsilon: f64,
    },
    Qt2 {
        n_qubits: usize,
        beta: C64,
        count: Option<usize>,
        epsilon: f64,
    },
    Qt3 {
        n_qubits: usize,
        t: f64,
        p: f64,
        theta: f64,
        omega: f64,
        beta: C64,
        count: Option<usize>,
        epsilon: f64,
    },
    Qwd {
        n: usize,
        m_rho: [f64; 2],
        v_rho: [[f64; 2]; 2],
        m_sigma: [f64; 2],
        v_sigma: [[f64; 2]; 2],
        epsilon: f64,
    },
    Ising {
        /// Qubits per subsystem; the chain has twice as many sites.
        n_per_side: usize,
        h: f64,
        /// Index into the ascending spectrum of the eigenvector used as the
        /// system state; 0 picks the smallest eigenvalue.
        level: usize,
        epsilon: f64,
    },
    Counterexample {
        h0: f64,
        h1: f64,
        epsilon: f64,
    },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<ProblemInstance, Error> {
        match &self.family {
            InstanceFamily::Qt1 {
                n_qubits,
                p,
                theta,
                omega,
                count,
                epsilon,
            } => {
                let rho = qt1_state(*n_qubits, *p, *theta, *omega)?;
                tomography_from_state(rho, *n_qubits, *count, self.seed, *epsilon)
            }
            InstanceFamily::Qt2 {
                n_qubits,
                beta,
                count,
                epsilon,
            } => {
                let rho = qt2_state(*n_qubits, *beta)?;
                tomography_from_state(rho, *n_qubits, *count, self.seed, *epsilon)
            }
            InstanceFamily::Qt3 {
                n_qubits,
                t,
                p,
                theta,
                omega,
                beta,
                count,
                epsilon,
            } => {
                let rho = qt3_state(*n_qubits, *t, *p, *theta, *omega, *beta)?;
                tomography_from_state(rho, *n_qubits, *count, self.seed, *epsilon)
            }
            InstanceFamily::Qwd {
                n,
                m_rho,
                v_rho,
                m_sigma,
                v_sigma,
                epsilon,
            } => Ok(qwd_instance(*n, *m_rho, *v_rho, *m_sigma, *v_sigma, *epsilon)?.instance),
            InstanceFamily::Ising {
                n_per_side,
                h,
                level,
                epsilon,
            } => ising_instance_level(*n_per_side, *h, *level, *epsilon),
            InstanceFamily::Counterexample { h0, h1, epsilon } => {
                counterexample_instance(*h0, *h1, *epsilon)
            }
        }
    }

    /// Whether building consumes the seed.
    pub fn uses_randomness(&self) -> bool {
        matches!(
            self.family,
            InstanceFamily::Qt1 { .. } | InstanceFamily::Qt2 { .. } | InstanceFamily::Qt3 { .. }
        )
    }
}

fn tomography_from_state(
    rho: HermOp,
    n_qubits: usize,
    count: Option<usize>,
    seed: u64,
    epsilon: f64,
) -> Result<ProblemInstance, Error> {
    let count = count.unwrap_or(2 * (1usize << n_qubits));
    let observables = sample_pauli_observables(n_qubits, count, seed)?;
    build_tomography(&rho, observables, epsilon)
}

/// Tomography instance: Q₀ = I with q₀ = 1, H = 0 and qᵢ = Tr[ρ_gen Qᵢ].
/// Feasible by construction since ρ_gen is itself a witness.
pub fn build_tomography(
    rho_gen: &HermOp,
    observables: Vec<HermOp>,
    epsilon: f64,
) -> Result<ProblemInstance, Error> {
    if (rho_gen.trace() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(alloc::format!(
            "generator state has trace {}, expected 1",
            rho_gen.trace()
        )));
    }
    let min = rho_gen.min_eigenvalue();
    if min < -1e-10 {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let d = rho_gen.dim();
    let mut all = Vec::with_capacity(observables.len() + 1);
    let mut outcomes = Vec::with_capacity(observables.len() + 1);
    all.push(HermOp::identity(d));
    outcomes.push(1.0);
    for q in observables {
        outcomes.push(q.trace_inner(rho_gen)?);
        all.push(q);
    }
    ProblemInstance::new(HermOp::zeros(d), all, outcomes, epsilon)
}

/// ρ₁(p, θ, ω) = p |ζ(θ,ω)⟩⟨ζ| + (1−p)/D · I on D = 2ⁿ.
pub fn qt1_state(n_qubits: usize, p: f64, theta: f64, omega: f64) -> Result<HermOp, Error> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParamOutOfRange {
            name: "p",
            value: p,
        });
    }
    let d = 1usize << n_qubits;
    let zeta = zeta_state(theta, omega, d)?;
    let pure = zeta.density().scaled(p);
    let mixed = HermOp::identity(d).scaled((1.0 - p) / d as f64);
    pure.add(&mixed)
}

/// ρ₂(β) = |cat_β⟩⟨cat_β| on D = 2ⁿ.
pub fn qt2_state(n_qubits: usize, beta: C64) -> Result<HermOp, Error> {
    let d = 1usize << n_qubits;
    Ok(cat_state(beta, d)?.density())
}

/// ρ₃ = t·ρ₁ + (1−t)·ρ₂.
pub fn qt3_state(
    n_qubits: usize,
    t: f64,
    p: f64,
    theta: f64,
    omega: f64,
    beta: C64,
) -> Result<HermOp, Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParamOutOfRange {
            name: "t",
            value: t,
        });
    }
    let r1 = qt1_state(n_qubits, p, theta, omega)?;
    let r2 = qt2_state(n_qubits, beta)?;
    r1.scaled(t).add(&r2.scaled(1.0 - t))
}

/// Uniform sample without replacement from the non-identity Pauli strings on
/// `n_qubits` qubits; does not include the identity (the tomography builder
/// prepends it as Q₀).
pub fn sample_pauli_observables(
    n_qubits: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<HermOp>, Error> {
    if n_qubits == 0 || n_qubits > 16 {
        return Err(Error::ParamOutOfRange {
            name: "n_qubits",
            value: n_qubits as f64,
        });
    }
    let total = 4usize.pow(n_qubits as u32) - 1;
    if count > total {
        return Err(Error::ParamOutOfRange {
            name: "observable count",
            value: count as f64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = alloc::collections::BTreeSet::new();
    while chosen.len() < count {
        // encode in base 4; 0 is the all-identity string and is excluded
        let idx = rng.gen_range(1..=total);
        chosen.insert(idx);
    }
    // fixed draw order for reproducibility independent of set iteration
    let mut ordered: Vec<usize> = chosen.into_iter().collect();
    // shuffle deterministically so the sample order is not sorted
    for i in (1..ordered.len()).rev() {
        let j = rng.gen_range(0..=i);
        ordered.swap(i, j);
    }
    ordered
        .into_iter()
        .map(|idx| {
            let mut digits = Vec::with_capacity(n_qubits);
            let mut rem = idx;
            for _ in 0..n_qubits {
                digits.push(match rem % 4 {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                });
                rem /= 4;
            }
            digits.reverse();
            pauli_string(&digits)
        })
        .collect()
}

/// Marginal-constraint observables and outcomes for a coupling problem: Q₀ =
/// I⊗I with q₀ = 1, then the Hermitian basis elements G_{ij}, H_{ij} tensored
/// against the identity on either side, M = 2n² constraints in total. Their
/// outcomes are the real and imaginary parts of the target marginals, so
/// Tr₂π = ρ and Tr₁π = σ hold exactly on the constraint set.
pub fn build_qot(
    hamiltonian: HermOp,
    rho: &HermOp,
    sigma: &HermOp,
    epsilon: f64,
) -> Result<ProblemInstance, Error> {
    let n = rho.dim();
    if sigma.dim() != n {
        return Err(Error::DimensionMismatch {
            left: sigma.dim(),
            right: n,
        });
    }
    if hamiltonian.dim() != n * n {
        return Err(Error::DimensionMismatch {
            left: hamiltonian.dim(),
            right: n * n,
        });
    }
    for (name, marg) in [("rho", rho), ("sigma", sigma)] {
        if (marg.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(alloc::format!(
                "marginal {name} has trace {} (must be 1 within 1e-10)",
                marg.trace()
            )));
        }
    }

    let id = HermOp::identity(n);
    let mut observables = Vec::with_capacity(2 * n * n + 1);
    let mut outcomes = Vec::with_capacity(2 * n * n + 1);
    observables.push(HermOp::identity(n * n));
    outcomes.push(1.0);

    // first marginal: Tr[(G_ij ⊗ I) π] = Re ρ_ij, Tr[(H_ij ⊗ I) π] = Im ρ_ij
    for (marg, left) in [(rho, true), (sigma, false)] {
        for i in 0..n {
            for j in i..n {
                let g = basis_g(n, i, j);
                observables.push(if left { g.kron(&id) } else { id.kron(&g) });
                outcomes.push(marg.entry(i, j).re);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let h = basis_h(n, i, j);
                observables.push(if left { h.kron(&id) } else { id.kron(&h) });
                outcomes.push(marg.entry(i, j).im);
            }
        }
    }

    ProblemInstance::new(hamiltonian, observables, outcomes, epsilon)
}

/// G_ij = (E_ij + E_ji)/2.
fn basis_g(n: usize, i: usize, j: usize) -> HermOp {
    let mut entries = alloc::vec![C64::new(0.0, 0.0); n * n];
    if i == j {
        entries[i * n + i] = C64::new(1.0, 0.0);
    } else {
        entries[i * n + j] = C64::new(0.5, 0.0);
        entries[j * n + i] = C64::new(0.5, 0.0);
    }
    HermOp::new(n, entries).expect("G basis element is Hermitian")
}

/// H_ij = i(E_ij − E_ji)/2.
fn basis_h(n: usize, i: usize, j: usize) -> HermOp {
    let mut entries = alloc::vec![C64::new(0.0, 0.0); n * n];
    entries[i * n + j] = C64::new(0.0, 0.5);
    entries[j * n + i] = C64::new(0.0, -0.5);
    HermOp::new(n, entries).expect("H basis element is Hermitian")
}

/// Coupling instance with the squared-quadrature-difference cost
/// (X⊗I − I⊗X)² + (P⊗I − I⊗P)² between two Gaussian states discretized on
/// `n` Fock levels.
pub struct QwdInstance {
    pub instance: ProblemInstance,
    pub rho_mass: f64,
    pub sigma_mass: f64,
    pub truncation_warning: bool,
}

pub fn qwd_instance(
    n: usize,
    m_rho: [f64; 2],
    v_rho: [[f64; 2]; 2],
    m_sigma: [f64; 2],
    v_sigma: [[f64; 2]; 2],
    epsilon: f64,
) -> Result<QwdInstance, Error> {
    let (x, p) = fock_quadratures(n)?;
    let hamiltonian = qwd_hamiltonian(&x, &p);
    let rho = gaussian_fock_density(m_rho, v_rho, n)?;
    let sigma = gaussian_fock_density(m_sigma, v_sigma, n)?;
    let instance = build_qot(hamiltonian, &rho.op, &sigma.op, epsilon)?;
    Ok(QwdInstance {
        instance,
        rho_mass: rho.captured_mass,
        sigma_mass: sigma.captured_mass,
        truncation_warning: rho.low_mass_warning || sigma.low_mass_warning,
    })
}

fn qwd_hamiltonian(x: &HermOp, p: &HermOp) -> HermOp {
    let n = x.dim();
    let id = HermOp::identity(n);
    let dx = x.kron(&id).sub(&id.kron(x)).expect("dims match");
    let dp = p.kron(&id).sub(&id.kron(p)).expect("dims match");
    let d2 = n * n;
    let dx2 = HermOp::hermitized(d2, crate::herm::matmul(dx.entries(), dx.entries(), d2));
    let dp2 = HermOp::hermitized(d2, crate::herm::matmul(dp.entries(), dp.entries(), d2));
    dx2.add(&dp2).expect("dims match")
}

/// Open-chain transverse-field Ising coupling instance on 2N qubits:
/// cost H = −Σ Z_i Z_{i+1} − h Σ X_i, system state the eigenvector at the
/// bottom of the spectrum, marginals its reduced density matrices.
pub fn ising_instance(n_per_side: usize, h: f64, epsilon: f64) -> Result<ProblemInstance, Error> {
    ising_instance_level(n_per_side, h, 0, epsilon)
}

/// Same, selecting the eigenvector at the given ascending-spectrum index.
pub fn ising_instance_level(
    n_per_side: usize,
    h: f64,
    level: usize,
    epsilon: f64,
) -> Result<ProblemInstance, Error> {
    if n_per_side == 0 || n_per_side > 6 {
        return Err(Error::ParamOutOfRange {
            name: "n_per_side",
            value: n_per_side as f64,
        });
    }
    let sites = 2 * n_per_side;
    let hamiltonian = ising_hamiltonian(sites, h)?;
    if level >= hamiltonian.dim() {
        return Err(Error::ParamOutOfRange {
            name: "level",
            value: level as f64,
        });
    }
    let sd = hamiltonian.spectral_decompose();
    let psi = crate::states::StateVector::normalized(sd.eigenvector(level).to_vec())?;
    let full = psi.density();
    let d_half = 1usize << n_per_side;
    let rho = full.partial_trace(Subsystem::Second, d_half)?;
    let sigma = full.partial_trace(Subsystem::First, d_half)?;
    build_qot(hamiltonian, &rho, &sigma, epsilon)
}

/// −Σ_{i<sites−1} Z_i Z_{i+1} − h Σ_i X_i with uniform couplings.
pub fn ising_hamiltonian(sites: usize, h: f64) -> Result<HermOp, Error> {
    if sites == 0 {
        return Err(Error::ZeroDimension);
    }
    let dim = 1usize << sites;
    let mut total = HermOp::zeros(dim);
    let mut spec = alloc::vec![Pauli::I; sites];
    for i in 0..sites.saturating_sub(1) {
        spec.fill(Pauli::I);
        spec[i] = Pauli::Z;
        spec[i + 1] = Pauli::Z;
        total = total.sub(&pauli_string(&spec)?)?;
    }
    for i in 0..sites {
        spec.fill(Pauli::I);
        spec[i] = Pauli::X;
        total = total.sub(&pauli_string(&spec)?.scaled(h))?;
    }
    Ok(total)
}

/// The two-dimensional instance whose only admissible state has a kernel:
/// Q₀ = I, Q₁ = |0⟩⟨0|, q = (1, 0), H = diag(h₀, h₁). Its dual has no
/// maximizer for exp-type ψ.
pub fn counterexample_instance(h0: f64, h1: f64, epsilon: f64) -> Result<ProblemInstance, Error> {
    ProblemInstance::new(
        HermOp::diag(&[h0, h1]),
        alloc::vec![HermOp::identity(2), HermOp::diag(&[1.0, 0.0])],
        alloc::vec![1.0, 0.0],
        epsilon,
    )
}

/// Random Hermitian with independent Gaussian-free entries in [-1, 1).
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> HermOp {
    let mut entries = alloc::vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        entries[i * d + i] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..d {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            entries[i * d + j] = z;
            entries[j * d + i] = z.conj();
        }
    }
    HermOp::new(d, entries).expect("constructed Hermitian")
}

/// Random density operator (PSD, unit trace).
pub fn random_density(d: usize, rng: &mut impl Rng) -> HermOp {
    let a = random_hermitian(d, rng);
    let p = a.lift(|x| x * x);
    let t = p.trace();
    p.scaled(1.0 / t)
}

/// Random instance that is feasible by construction: a strictly positive
/// state π₀ generates the outcomes, so the Slater condition holds.
pub fn random_feasible_instance(
    d: usize,
    extra_constraints: usize,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<(ProblemInstance, HermOp), Error> {
    let floor = 0.05;
    let pi0 = {
        let p = random_density(d, rng).scaled(1.0 - floor);
        p.add(&HermOp::identity(d).scaled(floor / d as f64))?
    };
    let mut observables = alloc::vec![HermOp::identity(d)];
    for _ in 0..extra_constraints {
        observables.push(random_hermitian(d, rng));
    }
    let outcomes: Vec<f64> = observables
        .iter()
        .map(|q| q.trace_inner(&pi0))
        .collect::<Result<_, _>>()?;
    let h = random_hermitian(d, rng);
    let inst = ProblemInstance::new(h, observables, outcomes, epsilon)?;
    Ok((inst, pi0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::feasibility_certificate;
    use crate::reg::Regularizer;
    use crate::solver::{solve, SolveStatus, SolverConfig};
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn tomography_trivial_outcomes() {
        let d = 2;
        let rho = HermOp::identity(d).scaled(0.5);
        let obs = vec![
            pauli_string(&[Pauli::X]).unwrap(),
            pauli_string(&[Pauli::Y]).unwrap(),
            pauli_string(&[Pauli::Z]).unwrap(),
        ];
        let inst = build_tomography(&rho, obs, 1.0).unwrap();
        for &q in &inst.outcomes()[1..] {
            assert!(q.abs() < 1e-14);
        }

        let ket0 = crate::states::StateVector::basis(2, 0).density();
        let inst = build_tomography(&ket0, vec![pauli_string(&[Pauli::Z]).unwrap()], 1.0).unwrap();
        assert!((inst.outcomes()[1] - 1.0).abs() < 1e-14);

        assert!(build_tomography(&HermOp::identity(2), vec![], 1.0).is_err());
    }

    #[test]
    fn qt1_outcomes_match_direct_trace() {
        let (n, p, theta, omega) = (2usize, 0.7, PI / 6.0, PI / 4.0);
        let rho = qt1_state(n, p, theta, omega).unwrap();
        let spec = InstanceSpec {
            family: InstanceFamily::Qt1 {
                n_qubits: n,
                p,
                theta,
                omega,
                count: None,
                epsilon: 1.0,
            },
            seed: 7,
        };
        let inst = spec.build().unwrap();
        assert_eq!(inst.observables().len(), 2 * 4 + 1);
        // independent dense double-sum for each outcome
        let d = rho.dim();
        for (qop, &q) in inst.observables().iter().zip(inst.outcomes()).skip(1) {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    acc += rho.entry(i, j) * qop.entry(j, i);
                }
            }
            assert!((acc.re - q).abs() < 1e-12);
            assert!(acc.im.abs() < 1e-12);
        }
    }

    #[test]
    fn qt_state_special_cases() {
        let d = 4;
        let r = qt1_state(2, 0.0, 0.3, 0.9).unwrap();
        assert!(
            r.sub(&HermOp::identity(d).scaled(0.25))
                .unwrap()
                .frobenius_norm()
                < 1e-14
        );

        let r = qt2_state(2, C64::new(0.0, 0.0)).unwrap();
        let vac = crate::states::StateVector::basis(d, 0).density();
        assert!(r.sub(&vac).unwrap().frobenius_norm() < 1e-13);

        let r1 = qt1_state(2, 0.7, 0.5, 0.25).unwrap();
        let r3 = qt3_state(2, 1.0, 0.7, 0.5, 0.25, C64::new(2.0, 0.0)).unwrap();
        assert!(r3.sub(&r1).unwrap().frobenius_norm() < 1e-14);

        assert!(qt1_state(2, 1.5, 0.0, 0.0).is_err());
        assert!(qt3_state(2, -0.1, 0.5, 0.0, 0.0, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn pauli_sampling_small_and_reproducible() {
        let obs = sample_pauli_observables(1, 3, 42).unwrap();
        assert_eq!(obs.len(), 3);
        // must be {X, Y, Z} in some order
        let x = pauli_string(&[Pauli::X]).unwrap();
        let y = pauli_string(&[Pauli::Y]).unwrap();
        let z = pauli_string(&[Pauli::Z]).unwrap();
        for target in [x, y, z] {
            assert!(obs
                .iter()
                .any(|o| o.sub(&target).unwrap().frobenius_norm() < 1e-14));
        }

        let a = sample_pauli_observables(2, 2, 5).unwrap();
        let b = sample_pauli_observables(2, 2, 5).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert_eq!(u.entries(), v.entries());
        }

        for o in sample_pauli_observables(2, 6, 9).unwrap() {
            let sq = crate::herm::matmul(o.entries(), o.entries(), o.dim());
            let sq = HermOp::hermitized(o.dim(), sq);
            assert!(sq.sub(&HermOp::identity(o.dim())).unwrap().frobenius_norm() < 1e-12);
        }

        assert!(sample_pauli_observables(1, 4, 0).is_err());
    }

    #[test]
    fn qot_constraints_encode_marginals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        let rho = random_density(n, &mut rng);
        let sigma = random_density(n, &mut rng);
        let h = random_hermitian(n * n, &mut rng);
        let inst = build_qot(h, &rho, &sigma, 1.0).unwrap();
        assert_eq!(inst.observables().len(), 2 * n * n + 1);

        // witness ρ⊗σ satisfies every constraint
        let witness = rho.kron(&sigma);
        for r in inst.constraint_residuals(&witness).unwrap() {
            assert!(r.abs() < 1e-10, "residual {r:e}");
        }

        // G-observable identity: Tr[(G_ij⊗I)(ρ⊗σ)] = Re ρ_ij
        let g01 = basis_g(n, 0, 1).kron(&HermOp::identity(n));
        let got = g01.trace_inner(&witness).unwrap();
        assert!((got - rho.entry(0, 1).re).abs() < 1e-12);
        let h01 = basis_h(n, 0, 1).kron(&HermOp::identity(n));
        let got = h01.trace_inner(&witness).unwrap();
        assert!((got - rho.entry(0, 1).im).abs() < 1e-12);

        // any π with the right marginals sits on the constraint set exactly
        let k = random_hermitian(n * n, &mut rng);
        let k1 = k.partial_trace(Subsystem::First, n).unwrap();
        let k2 = k.partial_trace(Subsystem::Second, n).unwrap();
        let id = HermOp::identity(n).scaled(1.0 / n as f64);
        let centered = k
            .sub(&id.kron(&k1))
            .unwrap()
            .sub(&k2.kron(&id))
            .unwrap()
            .add(&id.kron(&id).scaled(k.trace()))
            .unwrap();
        let pi = witness.add(&centered.scaled(0.1)).unwrap();
        for r in inst.constraint_residuals(&pi).unwrap() {
            assert!(r.abs() < 1e-10, "residual {r:e}");
        }

        let cert = feasibility_certificate(inst.observables(), inst.outcomes()).unwrap();
        assert!(cert.verdict.is_feasible());
    }

    #[test]
    fn qwd_hamiltonian_structure() {
        let n = 2;
        let (x, p) = fock_quadratures(n).unwrap();
        let h = qwd_hamiltonian(&x, &p);
        // PSD as a sum of squares
        assert!(h.min_eigenvalue() >= -1e-10);
        // hand assembly for n = 2
        let id = HermOp::identity(n);
        let dx = x.kron(&id).sub(&id.kron(&x)).unwrap();
        let dp = p.kron(&id).sub(&id.kron(&p)).unwrap();
        let mut expect = HermOp::zeros(4);
        for d in [dx, dp] {
            let sq = crate::herm::matmul(d.entries(), d.entries(), 4);
            expect = expect.add(&HermOp::hermitized(4, sq)).unwrap();
        }
        assert!(h.sub(&expect).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn qwd_broad_covariance_accepted() {
        let q = qwd_instance(
            8,
            [0.0, 0.0],
            [[3.0, 1.0], [1.0, 3.0]],
            [1.0, 1.0],
            [[10.0, 2.0], [2.0, 10.0]],
            1.0,
        )
        .unwrap();
        q.instance.validate().unwrap();
        // V = 10 I needs far more than 8 levels
        assert!(q.truncation_warning);
    }

    #[test]
    fn ising_small_spectrum() {
        let h = ising_hamiltonian(2, 0.0).unwrap();
        let eig = h.spectral_decompose();
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in eig.eigenvalues().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_instance_marginals() {
        let inst = ising_instance(1, 0.5, 1.0).unwrap();
        assert_eq!(inst.dim(), 4);
        assert_eq!(inst.observables().len(), 2 * 4 + 1);
        inst.validate().unwrap();
        let cert = inst.feasibility_certificate().unwrap();
        assert!(cert.verdict.is_feasible());

        // h = 0 ground-state marginals are diagonal
        let inst = ising_instance(1, 0.0, 1.0).unwrap();
        // outcomes encode the marginals; off-diagonal G/H outcomes vanish
        let n = 2;
        // layout: [1, G(0,0), G(0,1), G(1,1), H(0,1)] for each side
        let per_side = n * n;
        for side in 0..2 {
            let base = 1 + side * per_side;
            let g01 = inst.outcomes()[base + 1];
            let h01 = inst.outcomes()[base + 3];
            assert!(g01.abs() < 1e-10, "off-diagonal marginal {g01}");
            assert!(h01.abs() < 1e-10);
        }
    }

    #[test]
    fn counterexample_structure() {
        let inst = counterexample_instance(0.0, 1.0, 1.0).unwrap();
        // the unique admissible PSD state
        let pi0 = HermOp::diag(&[0.0, 1.0]);
        let diag = inst.slater_diagnostic(&pi0).unwrap();
        assert!(diag.min_eigenvalue.abs() < 1e-14);
        assert!(diag.residual_norm < 1e-14);

        let cfg = SolverConfig {
            tol: 1e-8,
            divergence_norm: 1e4,
            ..SolverConfig::default()
        };
        let inst = counterexample_instance(0.0, 1.0, 1000.0).unwrap();
        let r = solve(&inst, Regularizer::VonNeumann, &cfg).unwrap();
        assert!(!matches!(r.status, SolveStatus::Converged));
    }

    #[test]
    fn generated_instances_validate_and_certify() {
        let specs = [
            InstanceSpec {
                family: InstanceFamily::Qt1 {
                    n_qubits: 2,
                    p: 0.7,
                    theta: PI / 6.0,
                    omega: PI / 4.0,
                    count: None,
                    epsilon: 1.0,
                },
                seed: 11,
            },
            InstanceSpec {
                family: InstanceFamily::Qt2 {
                    n_qubits: 2,
                    beta: C64::new(1.0, 0.0),
                    count: Some(5),
                    epsilon: 0.5,
                },
                seed: 3,
            },
            InstanceSpec {
                family: InstanceFamily::Ising {
                    n_per_side: 1,
                    h: 0.5,
                    level: 0,
                    epsilon: 1.0,
                },
                seed: 0,
            },
        ];
        for spec in specs {
            let inst = spec.build().unwrap();
            inst.validate().unwrap();
            let cert = inst.feasibility_certificate().unwrap();
            assert!(cert.verdict.is_feasible(), "{:?}", spec.family);
            // determinism
            let again = spec.build().unwrap();
            assert_eq!(inst.outcomes(), again.outcomes());
        }
    }
}
