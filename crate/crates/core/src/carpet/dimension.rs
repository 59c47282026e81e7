use super::validate_p;
use crate::Result;

/// `log(p² - 1) / log p`.
pub fn hausdorff_dimension(p: u32) -> Result<f64> {
    validate_p(p)?;
    let p = f64::from(p);
    Ok((p * p - 1.0).ln() / p.ln())
}

/// `1 + log(p - 1) / log p`, a lower bound for the conformal dimension of `S_p`.
pub fn conformal_dim_lower_bound(p: u32) -> Result<f64> {
    validate_p(p)?;
    let p = f64::from(p);
    Ok(1.0 + (p - 1.0).ln() / p.ln())
}

/// Whether the dimension bounds alone rule out a quasisymmetry `S_p → S_q`:
/// true when the conformal dimension bound of `S_p` exceeds the Hausdorff
/// dimension of `S_q`.
pub fn dimension_distinguishable(p: u32, q: u32) -> Result<bool> {
    Ok(conformal_dim_lower_bound(p)? > hausdorff_dimension(q)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_three() {
        assert!((hausdorff_dimension(3).unwrap() - 1.892_789_260_714_372).abs() < 1e-12);
        assert!((conformal_dim_lower_bound(3).unwrap() - 1.630_929_753_571_457).abs() < 1e-12);
    }

    #[test]
    fn equal_parameters_are_not_distinguished() {
        for p in (3..=21).step_by(2) {
            assert!(!dimension_distinguishable(p, p).unwrap());
        }
    }

    #[test]
    fn invalid() {
        assert!(hausdorff_dimension(4).is_err());
        assert!(dimension_distinguishable(3, 1).is_err());
    }
}
