//! Scaling experiments: ratio of coefficient l_s value to sup-norm over a
//! grid of witness sizes, with log-log slope fits against the predicted
//! critical-exponent slopes.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{diagonal_form, fold_multilinear_to_multipolynomial, ksz_witness, PartitionScheme};
use crate::error::{Error, Result};
use crate::exponents::WitnessFamily;
use crate::norms::{
    holder_diagonal_bound, sup_norm_estimate, sup_norm_exact_vertex, NormMethod, OptimizerConfig,
};
use crate::poly::{BlockDegrees, Multipolynomial};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Diagonal,
    Ksz,
    Custom,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Diagonal => "diagonal",
            Family::Ksz => "ksz",
            Family::Custom => "custom",
        })
    }
}

impl From<WitnessFamily> for Family {
    fn from(w: WitnessFamily) -> Self {
        match w {
            WitnessFamily::Diagonal => Family::Diagonal,
            WitnessFamily::Ksz => Family::Ksz,
        }
    }
}

/// One (n, p, s) sample of the Hardy-Littlewood ratio.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub family: Family,
    pub degrees: BlockDegrees,
    pub total_degree: usize,
    pub p: f64,
    pub s: f64,
    pub n: usize,
    pub seed: u64,
    pub coeff_value: f64,
    pub norm_value: f64,
    pub norm_method: NormMethod,
    pub ratio: f64,
    pub wall_time_ms: u64,
}

/// Ordinary least squares of log(y) on log(n).
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_grid: Vec<usize>,
}

/// Ratio record for one polynomial. The norm comes from the vertex oracle
/// when it applies (p = infinity, multi-affine, within budget), otherwise
/// from the multi-start estimate; either way the norm is a lower bound, so
/// the reported ratio is an upper estimate of the true ratio.
pub fn hl_ratio(
    poly: &Multipolynomial,
    p: f64,
    s: f64,
    cfg: &OptimizerConfig,
) -> Result<ExperimentRecord> {
    let t0 = Instant::now();
    let coeff_value = poly.coeff_ls_value(s)?;
    let est = if p.is_infinite() && poly.is_multi_affine() {
        match sup_norm_exact_vertex(poly) {
            Ok(e) => e,
            Err(Error::BudgetExceeded(_)) => sup_norm_estimate(poly, p, cfg)?,
            Err(e) => return Err(e),
        }
    } else {
        sup_norm_estimate(poly, p, cfg)?
    };
    if est.value == 0.0 {
        return Err(Error::InvalidParameter("norm is zero (zero polynomial)".into()));
    }
    Ok(ExperimentRecord {
        family: Family::Custom,
        degrees: poly.degrees().clone(),
        total_degree: poly.degrees().total_degree(),
        p,
        s,
        n: poly.dims().iter().copied().max().unwrap_or(0),
        seed: cfg.seed,
        coeff_value,
        norm_value: est.value,
        norm_method: est.method,
        ratio: coeff_value / est.value,
        wall_time_ms: t0.elapsed().as_millis() as u64,
    })
}

fn diagonal_record(
    degrees: &BlockDegrees,
    p: f64,
    s: f64,
    n: usize,
) -> Result<ExperimentRecord> {
    let t0 = Instant::now();
    let total = degrees.total_degree();
    let tensor = diagonal_form(n, total)?;
    let scheme = PartitionScheme::contiguous_to_multipoly(degrees, n);
    let witness = fold_multilinear_to_multipolynomial(&tensor, degrees, &scheme)?;
    let coeff_value = witness.coeff_ls_value(s)?;
    // Exact norm n^((p-M)/p): the Holder bound is attained at uniform points.
    let norm_value = holder_diagonal_bound(n, total, p)?;
    Ok(ExperimentRecord {
        family: Family::Diagonal,
        degrees: degrees.clone(),
        total_degree: total,
        p,
        s,
        n,
        seed: 0,
        coeff_value,
        norm_value,
        norm_method: NormMethod::ClosedForm,
        ratio: coeff_value / norm_value,
        wall_time_ms: t0.elapsed().as_millis() as u64,
    })
}

fn ksz_record(
    degrees: &BlockDegrees,
    p: f64,
    s: f64,
    n: usize,
    draw_seed: u64,
    cfg: &OptimizerConfig,
) -> Result<ExperimentRecord> {
    let t0 = Instant::now();
    let total = degrees.total_degree();
    let witness = ksz_witness(n, degrees, draw_seed)?;
    let coeff_value = witness.coeff_ls_value(s)?;
    // At p = infinity the folded witness has the same norm as the sampled
    // tensor (its argument blocks range over independent cubes), and the
    // tensor's M-block form is the cheaper one to enumerate.
    let (norm_value, norm_method) = if p.is_infinite() {
        let tensor = crate::constructions::ksz_sample(n, total, draw_seed)?;
        let est = sup_norm_exact_vertex(&tensor.to_multipolynomial()?)?;
        (est.value, NormMethod::VertexExact)
    } else {
        let mut local = cfg.clone();
        local.seed = seed::derive(cfg.seed, &[n as u64, draw_seed]);
        let est = sup_norm_estimate(&witness, p, &local)?;
        (est.value, est.method)
    };
    if norm_value == 0.0 {
        return Err(Error::InvalidParameter("zero norm in ksz record".into()));
    }
    Ok(ExperimentRecord {
        family: Family::Ksz,
        degrees: degrees.clone(),
        total_degree: total,
        p,
        s,
        n,
        seed: draw_seed,
        coeff_value,
        norm_value,
        norm_method,
        ratio: coeff_value / norm_value,
        wall_time_ms: t0.elapsed().as_millis() as u64,
    })
}

/// All per-(n, seed) records of a sweep, ordered by (n, seed) regardless of
/// worker count. The diagonal family is deterministic and yields one record
/// per n.
pub fn ratio_sweep_full(
    family: WitnessFamily,
    degrees: &BlockDegrees,
    p: f64,
    s: f64,
    n_grid: &[usize],
    seeds: &[u64],
    cfg: &OptimizerConfig,
) -> Result<Vec<ExperimentRecord>> {
    if n_grid.len() < 3 {
        return Err(Error::InvalidParameter("n_grid must have at least 3 entries".into()));
    }
    match family {
        WitnessFamily::Diagonal => n_grid
            .par_iter()
            .map(|&n| diagonal_record(degrees, p, s, n))
            .collect(),
        WitnessFamily::Ksz => {
            if seeds.is_empty() {
                return Err(Error::EmptyInput("ksz sweep needs at least one seed".into()));
            }
            let jobs: Vec<(usize, u64)> = n_grid
                .iter()
                .flat_map(|&n| seeds.iter().map(move |&sd| (n, sd)))
                .collect();
            jobs.par_iter()
                .map(|&(n, sd)| ksz_record(degrees, p, s, n, sd, cfg))
                .collect()
        }
    }
}

/// Sweep with one record per n. For the ksz family the per-n record is the
/// lower-median draw by ratio (ties broken by seed), which keeps the
/// ratio * norm = coeff invariant intact.
pub fn ratio_sweep(
    family: WitnessFamily,
    degrees: &BlockDegrees,
    p: f64,
    s: f64,
    n_grid: &[usize],
    seeds: &[u64],
    cfg: &OptimizerConfig,
) -> Result<Vec<ExperimentRecord>> {
    let full = ratio_sweep_full(family, degrees, p, s, n_grid, seeds, cfg)?;
    match family {
        WitnessFamily::Diagonal => Ok(full),
        WitnessFamily::Ksz => Ok(n_grid
            .iter()
            .map(|&n| median_by_ratio(full.iter().filter(|r| r.n == n)))
            .collect()),
    }
}

fn median_by_ratio<'a>(records: impl Iterator<Item = &'a ExperimentRecord>) -> ExperimentRecord {
    let mut v: Vec<&ExperimentRecord> = records.collect();
    v.sort_by(|a, b| a.ratio.partial_cmp(&b.ratio).unwrap().then(a.seed.cmp(&b.seed)));
    v[(v.len() - 1) / 2].clone()
}

/// Median of a value extracted per record (used for norm-scaling fits).
pub fn median_of<F: Fn(&ExperimentRecord) -> f64>(records: &[ExperimentRecord], f: F) -> f64 {
    let mut v: Vec<f64> = records.iter().map(f).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[(v.len() - 1) / 2]
}

/// OLS fit of log(y) against log(n).
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<SlopeFit> {
    let mut distinct: Vec<usize> = points.iter().map(|&(n, _)| n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 distinct n".into()));
    }
    if points.iter().any(|&(n, y)| n == 0 || !(y > 0.0)) {
        return Err(Error::InvalidParameter("power-law fit needs positive n and y".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate n grid".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        n_grid: distinct,
    })
}

/// Fit of log(ratio) against log(n) over a sweep's records.
pub fn slope_fit(records: &[ExperimentRecord]) -> Result<SlopeFit> {
    let points: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.ratio)).collect();
    fit_power_law(&points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    DivergentBelowCritical,
    Inconsistent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::DivergentBelowCritical => "divergent_below_critical",
            Verdict::Inconsistent => "inconsistent",
        })
    }
}

/// Compare a fitted slope against the predicted one.
pub fn sharpness_verdict(fit: &SlopeFit, theory: f64, tol: f64) -> Verdict {
    if (fit.slope - theory).abs() <= tol {
        Verdict::Consistent
    } else if fit.slope > tol && theory > 0.0 {
        Verdict::DivergentBelowCritical
    } else {
        Verdict::Inconsistent
    }
}

/// Empirical lower bound on the best constant: the max observed ratio.
/// All records must share (degrees, p, s).
pub fn constant_estimate(records: &[ExperimentRecord]) -> Result<f64> {
    let first = records.first().ok_or_else(|| Error::EmptyInput("no records".into()))?;
    for r in records {
        if r.degrees != first.degrees || r.p != first.p || r.s != first.s {
            return Err(Error::InvalidParameter(
                "constant_estimate requires records sharing (degrees, p, s)".into(),
            ));
        }
    }
    Ok(records.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max))
}

/// CSV columns, in order. Floats carry 17 significant digits.
pub const CSV_HEADER: &str =
    "family,degrees,M,p,s,n,seed,coeff_value,norm_value,norm_method,ratio,wall_time_ms";

fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        (if x > 0.0 { "inf" } else { "-inf" }).to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn record_to_csv_line(r: &ExperimentRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.family,
        r.degrees,
        r.total_degree,
        fmt_float(r.p),
        fmt_float(r.s),
        r.n,
        r.seed,
        fmt_float(r.coeff_value),
        fmt_float(r.norm_value),
        r.norm_method,
        fmt_float(r.ratio),
        r.wall_time_ms
    )
}

/// Render a sweep as CSV. `comments` are emitted first, one `# ` line each.
pub fn records_to_csv(records: &[ExperimentRecord], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_to_csv_line(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rel_close, MultiIndex};

    fn unit_monomial() -> Multipolynomial {
        let mut p =
            Multipolynomial::new(BlockDegrees::new(vec![1, 1]).unwrap(), vec![1, 1]).unwrap();
        p.set_term(MultiIndex(vec![vec![1], vec![1]]), 1.0).unwrap();
        p
    }

    #[test]
    fn hl_ratio_unit_monomial() {
        let cfg = OptimizerConfig { starts: 8, seed: 1, ..Default::default() };
        for p in [2.0, 4.0, f64::INFINITY] {
            for s in [0.5, 1.0, 3.0] {
                let r = hl_ratio(&unit_monomial(), p, s, &cfg).unwrap();
                assert!(rel_close(r.ratio, 1.0, 1e-9), "ratio {}", r.ratio);
                assert!(rel_close(r.ratio * r.norm_value, r.coeff_value, 1e-12));
            }
        }
    }

    #[test]
    fn hl_ratio_rejects_zero_polynomial() {
        let z = Multipolynomial::new(BlockDegrees::new(vec![1, 1]).unwrap(), vec![2, 2]).unwrap();
        let cfg = OptimizerConfig { starts: 4, seed: 1, ..Default::default() };
        assert!(hl_ratio(&z, f64::INFINITY, 2.0, &cfg).is_err());
    }

    #[test]
    fn diagonal_sweep_examples() {
        let degrees = BlockDegrees::new(vec![1, 1]).unwrap();
        let cfg = OptimizerConfig::default();
        // s = critical = 3 at (M=2, p=3): all ratios 1.
        let recs = ratio_sweep(
            WitnessFamily::Diagonal,
            &degrees,
            3.0,
            3.0,
            &[2, 4, 8, 16],
            &[],
            &cfg,
        )
        .unwrap();
        for r in &recs {
            assert!(rel_close(r.ratio, 1.0, 1e-12));
        }
        // s = 2: ratio = n^(1/6).
        let recs = ratio_sweep(
            WitnessFamily::Diagonal,
            &degrees,
            3.0,
            2.0,
            &[2, 4, 8, 16],
            &[],
            &cfg,
        )
        .unwrap();
        for r in &recs {
            assert!(rel_close(r.ratio, (r.n as f64).powf(1.0 / 6.0), 1e-12));
        }
    }

    #[test]
    fn slope_fit_examples() {
        let pts: Vec<(usize, f64)> =
            [2, 4, 8, 16].iter().map(|&n| (n, (n as f64).powf(1.0 / 6.0))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope - 1.0 / 6.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);

        let flat: Vec<(usize, f64)> = [2, 4, 8].iter().map(|&n| (n, 5.0)).collect();
        let fit = fit_power_law(&flat).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert_eq!(fit.r2, 1.0);

        assert!(fit_power_law(&[(2, 1.0), (2, 1.0), (2, 1.0)]).is_err());
        assert!(fit_power_law(&[(2, 1.0), (4, 1.0)]).is_err());
    }

    #[test]
    fn verdict_examples() {
        let fit = SlopeFit { slope: 0.168, intercept: 0.0, r2: 1.0, n_grid: vec![2, 4, 8] };
        assert_eq!(sharpness_verdict(&fit, 1.0 / 6.0, 0.02), Verdict::Consistent);
        let fit = SlopeFit { slope: 0.0, intercept: 0.0, r2: 1.0, n_grid: vec![2, 4, 8] };
        assert_eq!(sharpness_verdict(&fit, 0.0, 0.02), Verdict::Consistent);
        let fit = SlopeFit { slope: 0.3, intercept: 0.0, r2: 1.0, n_grid: vec![2, 4, 8] };
        assert_eq!(sharpness_verdict(&fit, 0.0, 0.02), Verdict::Inconsistent);
        let fit = SlopeFit { slope: 0.5, intercept: 0.0, r2: 1.0, n_grid: vec![2, 4, 8] };
        assert_eq!(sharpness_verdict(&fit, 0.2, 0.02), Verdict::DivergentBelowCritical);
    }

    #[test]
    fn constant_estimate_examples() {
        let cfg = OptimizerConfig { starts: 8, seed: 1, ..Default::default() };
        let r = hl_ratio(&unit_monomial(), f64::INFINITY, 2.0, &cfg).unwrap();
        let c = constant_estimate(&[r]).unwrap();
        assert!(c >= 1.0 - 1e-12);

        let degrees = BlockDegrees::new(vec![1, 1]).unwrap();
        let recs = ratio_sweep(
            WitnessFamily::Diagonal,
            &degrees,
            3.0,
            3.0,
            &[2, 4, 8],
            &[],
            &cfg,
        )
        .unwrap();
        assert!(rel_close(constant_estimate(&recs).unwrap(), 1.0, 1e-12));

        let recs = ratio_sweep(
            WitnessFamily::Diagonal,
            &degrees,
            3.0,
            2.0,
            &[2, 4, 8],
            &[],
            &cfg,
        )
        .unwrap();
        assert!(rel_close(constant_estimate(&recs).unwrap(), 8f64.powf(1.0 / 6.0), 1e-12));

        assert!(constant_estimate(&[]).is_err());
    }

    #[test]
    fn ratios_increase_below_critical() {
        let degrees = BlockDegrees::new(vec![1, 1]).unwrap();
        let recs = ratio_sweep(
            WitnessFamily::Diagonal,
            &degrees,
            3.0,
            2.0,
            &[2, 4, 8, 16],
            &[],
            &OptimizerConfig::default(),
        )
        .unwrap();
        for w in recs.windows(2) {
            assert!(w[1].ratio > w[0].ratio);
        }
    }

    #[test]
    fn ksz_sweep_is_deterministic_and_ordered() {
        let degrees = BlockDegrees::new(vec![1, 1]).unwrap();
        let cfg = OptimizerConfig { starts: 4, seed: 9, ..Default::default() };
        let seeds: Vec<u64> = (0..5).collect();
        let a = ratio_sweep_full(
            WitnessFamily::Ksz,
            &degrees,
            f64::INFINITY,
            1.0,
            &[2, 3, 4],
            &seeds,
            &cfg,
        )
        .unwrap();
        let b = ratio_sweep_full(
            WitnessFamily::Ksz,
            &degrees,
            f64::INFINITY,
            1.0,
            &[2, 3, 4],
            &seeds,
            &cfg,
        )
        .unwrap();
        assert_eq!(records_to_csv(&a, &[]), records_to_csv(&b, &[]));
        let order: Vec<(usize, u64)> = a.iter().map(|r| (r.n, r.seed)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn csv_line_shape() {
        let degrees = BlockDegrees::new(vec![2, 1]).unwrap();
        let recs = ratio_sweep(
            WitnessFamily::Diagonal,
            &degrees,
            4.0,
            2.0,
            &[2, 4, 8],
            &[],
            &OptimizerConfig::default(),
        )
        .unwrap();
        let csv = records_to_csv(&recs, &["config={}".into()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# config={}");
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert!(first.starts_with("diagonal,2+1,3,"));
        assert_eq!(first.split(',').count(), 12);
    }
}
