//! Closed-form critical exponents and regime logic. p = infinity is the
//! ordinary f64 infinity, so 1/p = 0 falls out of the arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// p >= 2M.
    HighP,
    /// M < p < 2M.
    LowP,
    Invalid,
}

/// The (M, p) regime a Hardy-Littlewood statement lives in. The boundary
/// p = 2M is consistent with both formulas and is classified as high_p.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub total_degree: usize,
    pub p: f64,
}

impl Regime {
    pub fn classify(total_degree: usize, p: f64) -> Regime {
        let m = total_degree as f64;
        let kind = if p.is_nan() || total_degree == 0 || p <= m {
            RegimeKind::Invalid
        } else if p >= 2.0 * m {
            RegimeKind::HighP
        } else {
            RegimeKind::LowP
        };
        Regime { kind, total_degree, p }
    }
}

/// alpha(q) = 1/2 - 1/q for q >= 2, else 0.
pub fn alpha_of_q(q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    Ok(if q >= 2.0 { 0.5 - 1.0 / q } else { 0.0 })
}

/// Critical exponent 2Mp/(Mp + p - 2M) for p >= 2M; at p = infinity this is
/// the Bohnenblust-Hille exponent 2M/(M+1).
pub fn hl_exponent_high(total_degree: usize, p: f64) -> Result<f64> {
    let m = total_degree as f64;
    if total_degree == 0 || p.is_nan() || p < 2.0 * m {
        return Err(Error::InvalidParameter(format!(
            "hl_exponent_high requires p >= 2M, got M={total_degree}, p={p}"
        )));
    }
    if p.is_infinite() {
        return Ok(2.0 * m / (m + 1.0));
    }
    Ok(2.0 * m * p / (m * p + p - 2.0 * m))
}

/// Critical exponent p/(p - M) for M < p <= 2M.
pub fn hl_exponent_low(total_degree: usize, p: f64) -> Result<f64> {
    let m = total_degree as f64;
    if total_degree == 0 || p.is_nan() || p <= m || p > 2.0 * m {
        return Err(Error::InvalidParameter(format!(
            "hl_exponent_low requires M < p <= 2M, got M={total_degree}, p={p}"
        )));
    }
    Ok(p / (p - m))
}

/// Exponent of n in the improved KSZ bound: max{M(1/2 - 1/p) + 1/2, 1 - 1/p}.
pub fn ksz_exponent(total_degree: usize, p: f64) -> Result<f64> {
    let m = total_degree as f64;
    if total_degree == 0 || p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "ksz_exponent requires M >= 1 and p >= 1, got M={total_degree}, p={p}"
        )));
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok((m * (0.5 - inv_p) + 0.5).max(1.0 - inv_p))
}

/// Lower-bound witness family for sharpness experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamily {
    Diagonal,
    Ksz,
}

impl std::fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WitnessFamily::Diagonal => "diagonal",
            WitnessFamily::Ksz => "ksz",
        })
    }
}

/// Predicted log-log slope of the ratio coeff_ls / norm over n.
///
/// diagonal: 1/s - (p-M)/p; ksz: M/s - (M(1/2 - 1/p) + 1/2). A positive
/// slope means the ratio diverges, i.e. s is below the critical exponent.
pub fn theoretical_ratio_slope(
    total_degree: usize,
    p: f64,
    s: f64,
    witness: WitnessFamily,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let m = total_degree as f64;
    match witness {
        WitnessFamily::Diagonal => {
            if total_degree == 0 || p.is_nan() || p <= m {
                return Err(Error::InvalidParameter(format!(
                    "diagonal witness requires p > M, got M={total_degree}, p={p}"
                )));
            }
            let norm_exp = if p.is_infinite() { 1.0 } else { (p - m) / p };
            Ok(1.0 / s - norm_exp)
        }
        WitnessFamily::Ksz => {
            if total_degree == 0 || p.is_nan() || p < 2.0 * m {
                return Err(Error::InvalidParameter(format!(
                    "ksz witness requires p >= 2M, got M={total_degree}, p={p}"
                )));
            }
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            Ok(m / s - (m * (0.5 - inv_p) + 0.5))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of_q(2.0).unwrap(), 0.0);
        assert_eq!(alpha_of_q(f64::INFINITY).unwrap(), 0.5);
        assert_eq!(alpha_of_q(1.5).unwrap(), 0.0);
        assert!(alpha_of_q(0.5).is_err());
    }

    #[test]
    fn high_examples() {
        assert_eq!(hl_exponent_high(2, 4.0).unwrap(), 2.0);
        assert_eq!(hl_exponent_high(2, f64::INFINITY).unwrap(), 4.0 / 3.0);
        assert_eq!(hl_exponent_high(1, 2.0).unwrap(), 2.0);
        assert!(hl_exponent_high(2, 3.0).is_err());
    }

    #[test]
    fn low_examples() {
        assert_eq!(hl_exponent_low(2, 3.0).unwrap(), 3.0);
        assert_eq!(hl_exponent_low(2, 4.0).unwrap(), 2.0);
        assert_eq!(hl_exponent_low(3, 4.0).unwrap(), 4.0);
        assert!(hl_exponent_low(2, 2.0).is_err());
        assert!(hl_exponent_low(2, 4.5).is_err());
    }

    #[test]
    fn ksz_exponent_examples() {
        assert_eq!(ksz_exponent(2, f64::INFINITY).unwrap(), 1.5);
        assert_eq!(ksz_exponent(1, 2.0).unwrap(), 0.5);
        assert_eq!(ksz_exponent(3, 1.0).unwrap(), 0.0);
        assert!(ksz_exponent(2, 0.5).is_err());
    }

    #[test]
    fn slope_examples() {
        let s = theoretical_ratio_slope(2, 3.0, 3.0, WitnessFamily::Diagonal).unwrap();
        assert!(s.abs() < 1e-15);
        let s = theoretical_ratio_slope(2, 3.0, 2.0, WitnessFamily::Diagonal).unwrap();
        assert!((s - 1.0 / 6.0).abs() < 1e-15);
        let crit = hl_exponent_high(2, 4.0).unwrap();
        let s = theoretical_ratio_slope(2, 4.0, crit, WitnessFamily::Ksz).unwrap();
        assert!(s.abs() < 1e-15);
    }

    #[test]
    fn boundary_identity() {
        for m in 1..=8 {
            let p = 2.0 * m as f64;
            assert_eq!(hl_exponent_high(m, p).unwrap(), 2.0);
            assert_eq!(hl_exponent_low(m, p).unwrap(), 2.0);
        }
    }

    #[test]
    fn critical_slope_is_zero_for_both_witnesses() {
        for m in 1..=4 {
            let p = m as f64 * 1.5; // M < p < 2M for m >= 1? only if 1.5M > M: yes, and <= 2M.
            let crit = hl_exponent_low(m, p).unwrap();
            let slope = theoretical_ratio_slope(m, p, crit, WitnessFamily::Diagonal).unwrap();
            assert!(slope.abs() < 1e-14);

            let ph = 2.0 * m as f64 + 1.0;
            let crit = hl_exponent_high(m, ph).unwrap();
            let slope = theoretical_ratio_slope(m, ph, crit, WitnessFamily::Ksz).unwrap();
            assert!(slope.abs() < 1e-14);
        }
    }

    #[test]
    fn exponents_monotone_in_p() {
        for m in 1..=6 {
            let mf = m as f64;
            let mut prev = f64::INFINITY;
            for k in 0..50 {
                let p = 2.0 * mf + k as f64 * 0.5;
                let v = hl_exponent_high(m, p).unwrap();
                assert!(v <= prev + 1e-15);
                prev = v;
            }
            assert!(hl_exponent_high(m, f64::INFINITY).unwrap() <= prev);

            let mut prev = f64::INFINITY;
            for k in 1..=40 {
                let p = mf + k as f64 * (mf / 40.0);
                let v = hl_exponent_low(m, p).unwrap();
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn ksz_branch_crossover() {
        // The two branches agree iff p = 2 or M = 1.
        let branch_gap = |m: f64, p: f64| (m * (0.5 - 1.0 / p) + 0.5) - (1.0 - 1.0 / p);
        for m in 2..=5 {
            assert!(branch_gap(m as f64, 2.0).abs() < 1e-15);
            for p in [1.0, 1.5, 3.0, 10.0] {
                assert!(branch_gap(m as f64, p).abs() > 1e-12, "M={m} p={p}");
            }
        }
        for p in [1.0, 1.5, 2.0, 3.0, 10.0] {
            assert!(branch_gap(1.0, p).abs() < 1e-15);
        }
    }

    #[test]
    fn regime_classification() {
        assert_eq!(Regime::classify(2, 4.0).kind, RegimeKind::HighP);
        assert_eq!(Regime::classify(2, 5.0).kind, RegimeKind::HighP);
        assert_eq!(Regime::classify(2, 3.0).kind, RegimeKind::LowP);
        assert_eq!(Regime::classify(2, 2.0).kind, RegimeKind::Invalid);
        assert_eq!(Regime::classify(2, f64::INFINITY).kind, RegimeKind::HighP);
    }
}
