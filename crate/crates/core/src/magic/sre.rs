use crate::error::{check_probability, Error, Result};
use crate::qcore::{pauli_expectations, purity, DensityMatrix};

/// Purity-normalized stabilizer Renyi entropy
/// `(1/(1-a)) [ln(sum_P |tr(rho P)|^{2a} / 2^N) - ln tr(rho^2)]`.
pub fn sre(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive and finite")));
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return Err(Error::Unsupported("stabilizer Renyi entropy at alpha = 1".into()));
    }
    let e = pauli_expectations(rho)?;
    let d = rho.dim() as f64;
    let moment: f64 = e.iter().map(|x| x.abs().powf(2.0 * alpha)).sum::<f64>() / d;
    Ok(((moment).ln() - purity(rho).ln()) / (1.0 - alpha))
}

/// `sre(rho, 2)`.
pub fn sre2(rho: &DensityMatrix) -> Result<f64> {
    sre(rho, 2.0)
}

/// Witness `W_2 = M_2 - 2 S_2` with `S_2 = -ln tr(rho^2)`. Positive values
/// certify magic.
pub fn witness_w2(rho: &DensityMatrix) -> Result<f64> {
    Ok(sre2(rho)? + 2.0 * purity(rho).ln())
}

/// Closed-form `M_2` of a globally depolarized pure stabilizer state.
pub fn sre_depolarizing_analytic(p: f64, n: usize) -> Result<f64> {
    check_probability("p", p)?;
    let m = (2f64).powi(n as i32) - 1.0;
    let q = 1.0 - p;
    Ok(-((1.0 + q.powi(4) * m) / (1.0 + q * q * m)).ln())
}
