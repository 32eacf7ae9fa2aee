//! Quantum-state constructors: Pauli strings, truncated Fock-space
//! quadratures, cat and superposition states, and Gaussian states discretized
//! in the Fock basis.
//!
//! Quadrature convention (ħ = 1): X = (a + a†)/√2, P = i(a† − a)/√2, so the
//! vacuum covariance is I/2 and admissible covariance matrices satisfy
//! det V ≥ 1/4.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Error;
use crate::herm::{HermOp, C64};

/// Normalized complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Normalizes the amplitudes; zero vectors are rejected.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self, Error> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let norm = libm::sqrt(amplitudes.iter().map(|z| z.norm_sqr()).sum());
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes: amplitudes.iter().map(|z| z / norm).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = alloc::vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { dim, amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Rank-one projector |v⟩⟨v|.
    pub fn density(&self) -> HermOp {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        HermOp::new(d, entries).expect("outer product is Hermitian")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> HermOp {
        let z = |re: f64, im: f64| C64::new(re, im);
        let entries = match self {
            Pauli::I => alloc::vec![z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(1.0, 0.0)],
            Pauli::X => alloc::vec![z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)],
            Pauli::Y => alloc::vec![z(0.0, 0.0), z(0.0, -1.0), z(0.0, 1.0), z(0.0, 0.0)],
            Pauli::Z => alloc::vec![z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(-1.0, 0.0)],
        };
        HermOp::new(2, entries).expect("Pauli matrices are Hermitian")
    }

    pub fn from_char(c: char) -> Result<Self, Error> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            _ => Err(Error::InvalidInput(alloc::format!(
                "invalid Pauli symbol '{c}', expected one of I X Y Z"
            ))),
        }
    }
}

/// Tensor product of single-qubit Paulis, leftmost factor most significant.
pub fn pauli_string(spec: &[Pauli]) -> Result<HermOp, Error> {
    if spec.is_empty() {
        return Err(Error::InvalidInput("empty Pauli string".into()));
    }
    let mut op = spec[0].matrix();
    for p in &spec[1..] {
        op = op.kron(&p.matrix());
    }
    Ok(op)
}

/// Truncated quadrature operators on n Fock levels: the ladder operator acts
/// as a|l⟩ = √l |l−1⟩ and X = (a + a†)/√2, P = i(a† − a)/√2.
pub fn fock_quadratures(n: usize) -> Result<(HermOp, HermOp), Error> {
    if n < 2 {
        return Err(Error::ParamOutOfRange {
            name: "fock levels n",
            value: n as f64,
        });
    }
    let mut x = alloc::vec![C64::new(0.0, 0.0); n * n];
    let mut p = alloc::vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n - 1 {
        let c = libm::sqrt((i + 1) as f64 / 2.0);
        x[i * n + (i + 1)] = C64::new(c, 0.0);
        x[(i + 1) * n + i] = C64::new(c, 0.0);
        p[i * n + (i + 1)] = C64::new(0.0, -c);
        p[(i + 1) * n + i] = C64::new(0.0, c);
    }
    Ok((HermOp::new(n, x)?, HermOp::new(n, p)?))
}

/// Fock-truncated coherent state with amplitudes e^{−|β|²/2} βˡ/√l!.
/// Errors when the truncation retains less than 1e-8 of the norm.
pub fn coherent_state(beta: C64, dim: usize) -> Result<StateVector, Error> {
    if dim < 2 {
        return Err(Error::ParamOutOfRange {
            name: "fock dimension",
            value: dim as f64,
        });
    }
    let mut amps = Vec::with_capacity(dim);
    let mut a = C64::new(libm::exp(-beta.norm_sqr() / 2.0), 0.0);
    amps.push(a);
    for l in 1..dim {
        a = a * beta / libm::sqrt(l as f64);
        amps.push(a);
    }
    let norm = libm::sqrt(amps.iter().map(|z| z.norm_sqr()).sum());
    if norm < 1e-8 {
        return Err(Error::TruncationLoss { norm });
    }
    StateVector::normalized(amps)
}

/// Normalized |β⟩ + |−β⟩ in a D-dimensional truncated Fock space.
pub fn cat_state(beta: C64, dim: usize) -> Result<StateVector, Error> {
    let plus = coherent_state(beta, dim)?;
    let minus = coherent_state(-beta, dim)?;
    let amps: Vec<C64> = plus
        .amplitudes()
        .iter()
        .zip(minus.amplitudes())
        .map(|(a, b)| a + b)
        .collect();
    StateVector::normalized(amps)
}

/// cos θ |1⟩ + sin θ e^{iω} |D⟩ on the canonical basis |1..D⟩.
pub fn zeta_state(theta: f64, omega: f64, dim: usize) -> Result<StateVector, Error> {
    if dim < 2 {
        return Err(Error::ParamOutOfRange {
            name: "dimension",
            value: dim as f64,
        });
    }
    let mut amps = alloc::vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(libm::cos(theta), 0.0);
    amps[dim - 1] = C64::new(libm::cos(omega), libm::sin(omega)) * libm::sin(theta);
    StateVector::normalized(amps)
}

/// Gaussian state mapped to the truncated Fock basis.
#[derive(Debug, Clone)]
pub struct GaussianState {
    /// Normalized density operator P/Tr[P].
    pub op: HermOp,
    /// Probability mass Tr[P] captured by the truncation.
    pub captured_mass: f64,
    /// Set when the captured mass dropped below 0.99.
    pub low_mass_warning: bool,
}

/// Discretizes the Gaussian state with mean `m = (⟨X⟩, ⟨P⟩)` and covariance
/// `V` onto `n` Fock levels via quadrature of its position-space kernel
/// against Hermite functions.
///
/// The kernel of ρ_{m,V} on L²(R) is
///   ρ(x, x′) = (2πa)^{−1/2} exp(−u²/2a − det(V)·v²/2a) · e^{iv(m₂ + cu/a)}
/// with u = (x+x′)/2 − m₁, v = x − x′, a = V₁₁, c = V₁₂.
pub fn gaussian_fock_density(
    m: [f64; 2],
    v: [[f64; 2]; 2],
    n: usize,
) -> Result<GaussianState, Error> {
    if n < 2 {
        return Err(Error::ParamOutOfRange {
            name: "fock levels n",
            value: n as f64,
        });
    }
    let sym_dev = (v[0][1] - v[1][0]).abs();
    let scale = v.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if sym_dev > 1e-10 * scale.max(1.0) {
        return Err(Error::InvalidInput(
            "covariance matrix is not symmetric".into(),
        ));
    }
    let a = v[0][0];
    let b = v[1][1];
    let c = 0.5 * (v[0][1] + v[1][0]);
    let det = a * b - c * c;
    // Uncertainty principle V + (i/2)Ω ⪰ 0 for one mode: V ≻ 0 and det V ≥ 1/4.
    if a <= 0.0 || b <= 0.0 || det < 0.25 - 1e-9 {
        return Err(Error::InvalidCovariance { det });
    }

    // Quadrature grid: cover the state (mean ± 7σ) and the Hermite functions
    // (classical turning point √(2n+1)); the step resolves both the Hermite
    // oscillation and the kernel phase frequency.
    let sigma_x = libm::sqrt(a);
    let turning = libm::sqrt(2.0 * n as f64 + 1.0);
    let reach = m[0].abs() + 7.0 * sigma_x.max(1.0) + turning + 3.0;
    let freq = turning + m[1].abs() + (c.abs() / a) * reach + 1.0;
    let h = (PI / (6.0 * freq)).min(0.05);
    let half = libm::ceil(reach / h) as usize;
    let nodes = 2 * half + 1;

    let xs: Vec<f64> = (0..nodes).map(|k| (k as f64 - half as f64) * h).collect();

    // Hermite functions ψ_k(x) scaled by the trapezoid weight h.
    let mut tw = alloc::vec![0.0f64; n * nodes];
    let c0 = libm::pow(PI, -0.25);
    for (j, &x) in xs.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = c0 * libm::exp(-x * x / 2.0);
        tw[j] = cur * h;
        for k in 1..n {
            let next = x * libm::sqrt(2.0 / k as f64) * cur
                - libm::sqrt((k as f64 - 1.0) / k as f64) * prev;
            prev = cur;
            cur = next;
            tw[k * nodes + j] = cur * h;
        }
    }

    // The kernel decays like exp(−det(V)·v²/2a) off the diagonal, so only a
    // band |x − x′| ≤ v_cut carries weight above 1e-18. Band storage keeps
    // memory and the contraction cost linear in the node count.
    let v_cut = libm::sqrt(2.0 * (a / det) * 41.5);
    let band = (v_cut / h) as usize + 1;
    let width = 2 * band + 1;
    let norm = 1.0 / libm::sqrt(2.0 * PI * a);
    let inv2a = 1.0 / (2.0 * a);
    // kernel_band[i·width + (j − i + band)] = ρ(x_i, x_j)
    let mut kernel_band = alloc::vec![C64::new(0.0, 0.0); nodes * width];
    for i in 0..nodes {
        let j_lo = i.saturating_sub(band);
        let j_hi = (i + band).min(nodes - 1);
        for j in j_lo..=j_hi {
            let u = 0.5 * (xs[i] + xs[j]) - m[0];
            let vv = xs[i] - xs[j];
            let mag = -u * u * inv2a - det * vv * vv * inv2a;
            if mag < -700.0 {
                continue;
            }
            let amp = norm * libm::exp(mag);
            let phase = vv * (m[1] + c * u / a);
            kernel_band[i * width + (j + band - i)] =
                C64::new(amp * libm::cos(phase), amp * libm::sin(phase));
        }
    }

    // P = (Ψh) K (Ψh)ᵀ with real Ψh.
    let mut tk = alloc::vec![C64::new(0.0, 0.0); n * nodes];
    for k in 0..n {
        for j in 0..nodes {
            let i_lo = j.saturating_sub(band);
            let i_hi = (j + band).min(nodes - 1);
            let mut acc = C64::new(0.0, 0.0);
            for i in i_lo..=i_hi {
                let w = tw[k * nodes + i];
                if w != 0.0 {
                    acc += kernel_band[i * width + (j + band - i)] * w;
                }
            }
            tk[k * nodes + j] = acc;
        }
    }
    let mut p = alloc::vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        for l in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..nodes {
                acc += tk[k * nodes + j] * tw[l * nodes + j];
            }
            p[k * n + l] = acc;
        }
    }

    let op = HermOp::hermitized(n, p);
    let captured_mass = op.trace();
    if captured_mass <= 0.0 {
        return Err(Error::TruncationLoss {
            norm: captured_mass,
        });
    }
    Ok(GaussianState {
        op: op.scaled(1.0 / captured_mass),
        captured_mass,
        low_mass_warning: captured_mass < 0.99,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::Subsystem;
    use alloc::vec;

    #[test]
    fn pauli_string_closed_forms() {
        let z = pauli_string(&[Pauli::Z]).unwrap();
        assert!(z.sub(&HermOp::diag(&[1.0, -1.0])).unwrap().frobenius_norm() < 1e-15);
        let zz = pauli_string(&[Pauli::Z, Pauli::Z]).unwrap();
        assert!(
            zz.sub(&HermOp::diag(&[1.0, -1.0, -1.0, 1.0]))
                .unwrap()
                .frobenius_norm()
                < 1e-15
        );
        // Ordering convention: leftmost factor most significant.
        let iz = pauli_string(&[Pauli::I, Pauli::Z]).unwrap();
        assert!(
            iz.sub(&HermOp::diag(&[1.0, -1.0, 1.0, -1.0]))
                .unwrap()
                .frobenius_norm()
                < 1e-15
        );
        assert!(pauli_string(&[]).is_err());
    }

    #[test]
    fn pauli_strings_are_involutions() {
        use Pauli::*;
        for a in [I, X, Y, Z] {
            for b in [I, X, Y, Z] {
                let s = pauli_string(&[a, b]).unwrap();
                let sq = crate::herm::matmul(s.entries(), s.entries(), 4);
                let sq = HermOp::hermitized(4, sq);
                assert!(sq.sub(&HermOp::identity(4)).unwrap().frobenius_norm() < 1e-14);
            }
        }
    }

    #[test]
    fn quadratures_small_and_hermitian() {
        let (x, _) = fock_quadratures(2).unwrap();
        let s = 1.0 / libm::sqrt(2.0);
        assert!((x.entry(0, 1).re - s).abs() < 1e-15);
        assert!((x.entry(1, 0).re - s).abs() < 1e-15);
        assert!(x.entry(0, 0).norm() < 1e-15);
        assert!(fock_quadratures(1).is_err());
        // invariant at larger n: construction already validates Hermiticity
        fock_quadratures(50).unwrap();
    }

    #[test]
    fn quadrature_commutator_truncation() {
        let n = 12;
        let (x, p) = fock_quadratures(n).unwrap();
        let xp = crate::herm::matmul(x.entries(), p.entries(), n);
        let px = crate::herm::matmul(p.entries(), x.entries(), n);
        // [X,P] = iI on the leading (n-1)x(n-1) block
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let comm = xp[i * n + j] - px[i * n + j];
                let expect = if i == j {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((comm - expect).norm() < 1e-12, "block entry ({i},{j})");
            }
        }
    }

    #[test]
    fn zeta_closed_forms() {
        let d = 6;
        let z = zeta_state(0.0, 1.3, d).unwrap();
        assert!((z.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let z = zeta_state(core::f64::consts::FRAC_PI_4, 0.0, d).unwrap();
        let s = 1.0 / libm::sqrt(2.0);
        assert!((z.amplitudes()[0].re - s).abs() < 1e-12);
        assert!((z.amplitudes()[d - 1].re - s).abs() < 1e-12);
        assert!((z.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_zero_is_vacuum() {
        let c = cat_state(C64::new(0.0, 0.0), 8).unwrap();
        assert!((c.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        for a in &c.amplitudes()[1..] {
            assert!(a.norm() < 1e-14);
        }
    }

    #[test]
    fn cat_truncation_rejected() {
        let e = cat_state(C64::new(9.0, 0.0), 4);
        assert!(matches!(e, Err(Error::TruncationLoss { .. })));
    }

    #[test]
    fn gaussian_vacuum() {
        let g = gaussian_fock_density([0.0, 0.0], [[0.5, 0.0], [0.0, 0.5]], 10).unwrap();
        assert!((g.captured_mass - 1.0).abs() < 1e-8);
        assert!(!g.low_mass_warning);
        let vac = StateVector::basis(10, 0).density();
        assert!(g.op.sub(&vac).unwrap().frobenius_norm() < 1e-8);
    }

    #[test]
    fn gaussian_coherent_oracle() {
        // m = (√2 β, 0), V = I/2 is the coherent state |β⟩⟨β| for real β.
        let beta = 0.8;
        let n = 24;
        let g = gaussian_fock_density([libm::sqrt(2.0) * beta, 0.0], [[0.5, 0.0], [0.0, 0.5]], n)
            .unwrap();
        let coh = coherent_state(C64::new(beta, 0.0), n).unwrap().density();
        let diff = g.op.sub(&coh).unwrap().frobenius_norm();
        assert!(diff < 1e-8, "diff {diff:e}");
    }

    #[test]
    fn gaussian_moment_oracle() {
        // Tr[X ρ] reproduces the first moment for a broad thermal-like state.
        let m = [1.0, 1.0];
        let v = [[10.0, 2.0], [2.0, 10.0]];
        let n = 220;
        let g = gaussian_fock_density(m, v, n).unwrap();
        let (x, p) = fock_quadratures(n).unwrap();
        let mx = x.trace_inner(&g.op).unwrap();
        let mp = p.trace_inner(&g.op).unwrap();
        assert!((mx - m[0]).abs() < 1e-6, "⟨X⟩ = {mx}");
        assert!((mp - m[1]).abs() < 1e-6, "⟨P⟩ = {mp}");
    }

    #[test]
    fn gaussian_psd_unit_trace() {
        let g = gaussian_fock_density([0.3, -0.2], [[3.0, 1.0], [1.0, 3.0]], 30).unwrap();
        assert!((g.op.trace() - 1.0).abs() < 1e-12);
        assert!(g.op.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn gaussian_uncertainty_rejected() {
        let e = gaussian_fock_density([0.0, 0.0], [[0.1, 0.0], [0.0, 0.1]], 8);
        assert!(matches!(e, Err(Error::InvalidCovariance { .. })));
    }

    #[test]
    fn density_partial_trace_roundtrip() {
        // sanity: |00⟩⟨00| reduces to |0⟩⟨0|
        let v = StateVector::basis(4, 0);
        let r = v.density().partial_trace(Subsystem::Second, 2).unwrap();
        assert!(
            r.sub(&StateVector::basis(2, 0).density())
                .unwrap()
                .frobenius_norm()
                < 1e-14
        );
    }

    #[test]
    fn pauli_symbol_parsing() {
        assert_eq!(Pauli::from_char('x').unwrap(), Pauli::X);
        assert_eq!(Pauli::from_char('I').unwrap(), Pauli::I);
        assert!(Pauli::from_char('Q').is_err());
    }

    #[test]
    fn normalized_rejects_zero() {
        assert!(matches!(
            StateVector::normalized(vec![C64::new(0.0, 0.0); 3]),
            Err(Error::ZeroNorm)
        ));
    }
}
