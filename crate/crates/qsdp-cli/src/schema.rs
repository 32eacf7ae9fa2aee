//! JSON wire formats.
//!
//! Complex matrices are encoded as `{dim, re: [[...]], im: [[...]]}` with
//! row-major arrays; problems as `{epsilon, H, Q: [...], q: [...]}`;
//! instance specs as `{family, params, seed}`.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qsdp_core::instances::{InstanceFamily, InstanceSpec};
use qsdp_core::{HermOp, ProblemInstance, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_op(op: &HermOp) -> Self {
        let d = op.dim();
        let mut re = vec![vec![0.0; d]; d];
        let mut im = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                let z = op.entry(i, j);
                re[i][j] = z.re;
                im[i][j] = z.im;
            }
        }
        Self { dim: d, re, im }
    }

    pub fn to_op(&self) -> Result<HermOp> {
        let d = self.dim;
        if self.re.len() != d || self.im.len() != d {
            bail!("matrix row count does not match dim {d}");
        }
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            if self.re[i].len() != d || self.im[i].len() != d {
                bail!("matrix row {i} length does not match dim {d}");
            }
            for j in 0..d {
                entries.push(C64::new(self.re[i][j], self.im[i][j]));
            }
        }
        HermOp::new(d, entries).map_err(|e| anyhow::anyhow!("matrix entry validation: {e}"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    pub epsilon: f64,
    #[serde(rename = "H")]
    pub hamiltonian: MatrixJson,
    #[serde(rename = "Q")]
    pub observables: Vec<MatrixJson>,
    pub q: Vec<f64>,
}

impl ProblemJson {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self {
            epsilon: inst.epsilon(),
            hamiltonian: MatrixJson::from_op(inst.hamiltonian()),
            observables: inst.observables().iter().map(MatrixJson::from_op).collect(),
            q: inst.outcomes().to_vec(),
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let h = self.hamiltonian.to_op().context("field H")?;
        let mut obs = Vec::with_capacity(self.observables.len());
        for (i, m) in self.observables.iter().enumerate() {
            obs.push(m.to_op().with_context(|| format!("field Q[{i}]"))?);
        }
        ProblemInstance::new(h, obs, self.q.clone(), self.epsilon)
            .map_err(|e| anyhow::anyhow!("{e}"))
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SpecJson {
    pub family: String,
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Deserialize)]
struct Qt1Params {
    n_qubits: usize,
    p: f64,
    theta: f64,
    omega: f64,
    #[serde(default)]
    count: Option<usize>,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
struct Qt2Params {
    n_qubits: usize,
    beta: ComplexJson,
    #[serde(default)]
    count: Option<usize>,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
struct Qt3Params {
    n_qubits: usize,
    t: f64,
    p: f64,
    theta: f64,
    omega: f64,
    beta: ComplexJson,
    #[serde(default)]
    count: Option<usize>,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
struct QwdParams {
    n: usize,
    m_rho: [f64; 2],
    v_rho: [[f64; 2]; 2],
    m_sigma: [f64; 2],
    v_sigma: [[f64; 2]; 2],
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
struct IsingParams {
    n_per_side: usize,
    h: f64,
    #[serde(default)]
    level: usize,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
struct CounterexampleParams {
    h0: f64,
    h1: f64,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
struct CustomParams {
    problem: ProblemJson,
}

/// A parsed spec: either a generator family or an inline problem.
pub enum ParsedSpec {
    Family(InstanceSpec),
    Inline(Box<ProblemInstance>),
}

/// Resolves the family tag and parameters. Random families require a seed
/// (from the spec file or the --seed flag); deterministic ones default to 0.
pub fn parse_spec(spec: &SpecJson, seed_flag: Option<u64>) -> Result<ParsedSpec> {
    let tag = spec.family.to_ascii_lowercase();
    let params = spec.params.clone();
    let family = match tag.as_str() {
        "qt1" => {
            let p: Qt1Params = from_params(params)?;
            InstanceFamily::Qt1 {
                n_qubits: p.n_qubits,
                p: p.p,
                theta: p.theta,
                omega: p.omega,
                count: p.count,
                epsilon: p.epsilon,
            }
        }
        "qt2" => {
            let p: Qt2Params = from_params(params)?;
            InstanceFamily::Qt2 {
                n_qubits: p.n_qubits,
                beta: C64::new(p.beta.re, p.beta.im),
                count: p.count,
                epsilon: p.epsilon,
            }
        }
        "qt3" => {
            let p: Qt3Params = from_params(params)?;
            InstanceFamily::Qt3 {
                n_qubits: p.n_qubits,
                t: p.t,
                p: p.p,
                theta: p.theta,
                omega: p.omega,
                beta: C64::new(p.beta.re, p.beta.im),
                count: p.count,
                epsilon: p.epsilon,
            }
        }
        "qwd" => {
            let p: QwdParams = from_params(params)?;
            InstanceFamily::Qwd {
                n: p.n,
                m_rho: p.m_rho,
                v_rho: p.v_rho,
                m_sigma: p.m_sigma,
                v_sigma: p.v_sigma,
                epsilon: p.epsilon,
            }
        }
        "im" | "ising" => {
            let p: IsingParams = from_params(params)?;
            InstanceFamily::Ising {
                n_per_side: p.n_per_side,
                h: p.h,
                level: p.level,
                epsilon: p.epsilon,
            }
        }
        "counterexample" => {
            let p: CounterexampleParams = from_params(params)?;
            InstanceFamily::Counterexample {
                h0: p.h0,
                h1: p.h1,
                epsilon: p.epsilon,
            }
        }
        "custom" => {
            let p: CustomParams = from_params(params)?;
            return Ok(ParsedSpec::Inline(Box::new(p.problem.to_instance()?)));
        }
        other => bail!(
            "unknown family '{other}', expected one of qt1, qt2, qt3, qwd, im, counterexample, custom"
        ),
    };

    let spec_typed = InstanceSpec {
        family,
        seed: seed_flag.or(spec.seed).unwrap_or(0),
    };
    if spec_typed.uses_randomness() && seed_flag.is_none() && spec.seed.is_none() {
        bail!(
            "family '{tag}' draws random observables: pass --seed or put \"seed\" in the spec file"
        );
    }
    Ok(ParsedSpec::Family(spec_typed))
}

fn from_params<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
    serde_json::from_value(v).context("invalid params object for this family")
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub reg: String,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub memory: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub divergence_norm: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub config: ConfigEcho,
    pub status: String,
    pub alpha_star: Vec<f64>,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub slackness_residual: f64,
    pub residuals: Vec<f64>,
    pub final_grad_norm: f64,
    pub zero_temp_margin: f64,
    /// Smallest eigenvalue of the recovered state.
    pub omega0: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub qsdp_core: &'static str,
    pub qsdp_cli: &'static str,
}

/// Every run with an output directory writes one of these next to its
/// artifacts; reruns with identical inputs reproduce identical numbers.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub versions: Versions,
}

pub fn versions() -> Versions {
    Versions {
        qsdp_core: env!("CARGO_PKG_VERSION"),
        qsdp_cli: env!("CARGO_PKG_VERSION"),
    }
}
