use crate::error::{Error, Result};

/// Least-squares slope of −ln(sop) against ln(ρ_d) over the top decade of ρ_d.
///
/// `curve` holds (ρ_d linear, sop) pairs with strictly increasing ρ_d.
pub fn diversity_order_estimate(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: curve.len(),
        });
    }
    for w in curve.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::domain(
                "diversity_order_estimate",
                "rho_d must be strictly increasing",
            ));
        }
    }
    if let Some(&(rho, sop)) = curve
        .iter()
        .find(|&&(r, s)| !(r > 0.0 && s > 0.0 && s.is_finite() && r.is_finite()))
    {
        return Err(Error::domain(
            "diversity_order_estimate",
            format!("need positive finite rho_d and sop, got ({rho}, {sop})"),
        ));
    }
    let top = curve.last().unwrap().0;
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|&&(r, _)| r >= top / 10.0 * (1.0 - 1e-12))
        .map(|&(r, s)| (r.ln(), -s.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}
