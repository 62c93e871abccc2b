//! Closed-form annealed fidelities, critical lines and the effective
//! depolarizing parameter of random Clifford encoding-decoding circuits.

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{check_probability, Error, Result};
use crate::qcore::C64;

/// Code size: `N` physical qubits carrying `k` logical qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    n: usize,
    k: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("need 0 < k < N, got N={n}, k={k}")));
        }
        if n > 1000 {
            return Err(Error::InvalidParameter(format!("N = {n} too large")));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn logical_dim(&self) -> f64 {
        (2f64).powi(self.k as i32)
    }
}

/// `lambda(p) = 1 + sqrt(1-p) - p/2`.
pub fn lambda_ad(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(1.0 + (1.0 - p).sqrt() - p / 2.0)
}

/// Annealed decoding fidelity under amplitude damping,
/// `F = (2^N-1)(1+lambda^N) / ((2^N-2^k) lambda^N + 2^{N+k} - 1)`.
pub fn fidelity_ad(p: f64, params: CodeParams) -> Result<f64> {
    let lam = lambda_ad(p)?;
    Ok(fidelity_from_lambda(lam, params))
}

/// Evaluates the amplitude-damping fidelity in log-scaled form; every term is
/// divided by `max(lambda^N, 2^k)` so nothing overflows at large `N`.
fn fidelity_from_lambda(lam: f64, params: CodeParams) -> f64 {
    let (n, k) = (params.n as f64, params.k as f64);
    let ln2 = std::f64::consts::LN_2;
    let log_ln = n * lam.ln();
    let log_scale = log_ln.max(k * ln2);
    // numerator (2^N - 1)(1 + lambda^N), denominator 2^N [(1 - 2^{k-N}) lambda^N + 2^k - 2^-N]
    let one_minus = -(-n * ln2).exp_m1(); // 1 - 2^-N
    let num = one_minus * ((-log_scale).exp() + (log_ln - log_scale).exp());
    let den = (-(-(n - k) * ln2).exp_m1()) * (log_ln - log_scale).exp() + (k * ln2 - log_scale).exp()
        - (-n * ln2 - log_scale).exp();
    num / den
}

/// `F(Lambda) = (2^N-1)(2^N+Lambda^N) / (2^N(2^{k+N}-1) + (2^N-2^k) Lambda^N)`,
/// the fidelity in terms of the single-site transfer trace. Validated only for
/// amplitude damping and amplitude damping followed by a Z rotation.
pub(crate) fn fidelity_from_transfer(big_lambda: f64, params: CodeParams) -> f64 {
    fidelity_from_lambda(big_lambda / 2.0, params)
}

/// `B(p, alpha) = 2 - p + 2 sqrt(1-p) cos(alpha)`.
pub fn transfer_factor_mixed(p: f64, alpha: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(2.0 - p + 2.0 * (1.0 - p).sqrt() * alpha.cos())
}

/// Annealed fidelity under amplitude damping with a coherent Z rotation.
pub fn fidelity_mixed(p: f64, alpha: f64, params: CodeParams) -> Result<f64> {
    Ok(fidelity_from_transfer(transfer_factor_mixed(p, alpha)?, params))
}

fn check_rate(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("code rate {r} outside (0, 1)")));
    }
    Ok(())
}

/// `p_c(r) = 2^{(3+r)/2} - 2^{r+1}`.
pub fn p_critical(r: f64) -> Result<f64> {
    check_rate(r)?;
    Ok((2f64).powf((3.0 + r) / 2.0) - (2f64).powf(r + 1.0))
}

/// Angle `alpha in [0, pi]` solving `B(p, alpha) = 2^{1+r}`, or `None` when no
/// angle reaches the boundary at this `p`.
pub fn alpha_boundary(p: f64, r: f64) -> Result<Option<f64>> {
    check_probability("p", p)?;
    check_rate(r)?;
    let s = (1.0 - p).sqrt();
    if s == 0.0 {
        return Ok(None);
    }
    let c = ((2f64).powf(1.0 + r) - 2.0 + p) / (2.0 * s);
    if c.abs() > 1.0 + 1e-12 {
        return Ok(None);
    }
    Ok(Some(c.clamp(-1.0, 1.0).acos()))
}

/// `tau = (d_L F - 1) / (d_L - 1)` with `F` the amplitude-damping fidelity.
pub fn tau_effective(p: f64, params: CodeParams) -> Result<f64> {
    let d = params.logical_dim();
    Ok((d * fidelity_ad(p, params)? - 1.0) / (d - 1.0))
}

/// `tau = (2^N lambda^N - 1) / ((2^N - 2^k) lambda^N + 2^{N+k} - 1)`.
pub fn tau_closed_form(p: f64, params: CodeParams) -> Result<f64> {
    let lam = lambda_ad(p)?;
    let (n, k) = (params.n as i32, params.k as i32);
    let two_n = (2f64).powi(n);
    let ln = lam.powi(n);
    Ok((two_n * ln - 1.0) / ((two_n - (2f64).powi(k)) * ln + (2f64).powi(n + k) - 1.0))
}

/// Mean-state purity `tau^2 + (1 - tau^2)/d_L` for a pure logical input.
pub fn purity_mean(tau: f64, params: CodeParams) -> f64 {
    let d = params.logical_dim();
    tau * tau + (1.0 - tau * tau) / d
}

/// `tr Q` with `Q = sum_i K_i (x) conj(K_i)`, i.e. `sum_i |tr K_i|^2`.
pub fn replica_transfer_trace(channel: &KrausChannel) -> Result<f64> {
    if channel.n_qubits_acted() != 1 {
        return Err(Error::Dimension(format!(
            "single-qubit channel required, got {} qubits",
            channel.n_qubits_acted()
        )));
    }
    Ok(channel
        .kraus_ops()
        .iter()
        .map(|k| {
            let t: C64 = k.trace();
            t.norm_sqr()
        })
        .sum())
}
