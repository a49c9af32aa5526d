//! Sup-norms of multipolynomials over products of lp unit balls.
//!
//! `sup_norm_estimate` is a multi-start ascent giving a certified lower bound
//! (the value is an evaluation at a feasible point). `sup_norm_exact_vertex`
//! is an exact oracle for multi-affine polynomials at p = infinity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{rel_close, Multipolynomial, Point};
use crate::seed;

/// Default evaluation budget for the vertex oracle (2^24).
pub const DEFAULT_VERTEX_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    GradientAscent,
    AlternatingDual,
    VertexExact,
    /// Closed-form norm (diagonal family, M < p); used by experiments.
    ClosedForm,
}

impl std::fmt::Display for NormMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NormMethod::GradientAscent => "gradient_ascent",
            NormMethod::AlternatingDual => "alternating_dual",
            NormMethod::VertexExact => "vertex_exact",
            NormMethod::ClosedForm => "closed_form",
        };
        f.write_str(s)
    }
}

/// A certified lower bound on a sup-norm, with the witnessing point.
#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub starts: usize,
    pub converged_starts: usize,
    pub best_point: Point,
}

impl NormEstimate {
    /// Re-check the certificate: value matches |P(best_point)| and the point
    /// lies in the product of lp balls (tolerance 1e-12).
    pub fn verify(&self, p: &Multipolynomial, ball_p: f64) -> Result<bool> {
        let v = p.evaluate(&self.best_point)?.abs();
        if !rel_close(v, self.value, 1e-9) {
            return Ok(false);
        }
        for block in self.best_point.blocks() {
            if lp_norm(block, ball_p) > 1.0 + 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Settings for the multi-start ascent.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 64,
            max_iters: 2000,
            step_init: 0.1,
            rel_tol: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter("starts and max_iters must be positive".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::InvalidParameter("step_init must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter("rel_tol must lie in (0,1)".into()));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

/// lp norm of a vector; p = infinity gives the max-abs norm.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Normalize onto the lp unit sphere.
pub fn lp_sphere_project(v: &[f64], p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    let n = lp_norm(v, p);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Exact maximizer of a linear functional c over the lp unit ball:
/// the lp duality mapping, normalized to the sphere. Returns None for c = 0.
fn dual_maximizer(c: &[f64], p: f64) -> Option<Vec<f64>> {
    if c.iter().all(|&x| x == 0.0) {
        return None;
    }
    if p.is_infinite() {
        return Some(c.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect());
    }
    if p == 1.0 {
        let (jmax, _) = c
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |(bj, bv), (j, x)| {
                if x.abs() > bv {
                    (j, x.abs())
                } else {
                    (bj, bv)
                }
            });
        let mut v = vec![0.0; c.len()];
        v[jmax] = c[jmax].signum();
        return Some(v);
    }
    let q = 1.0 / (p - 1.0);
    let raw: Vec<f64> = c.iter().map(|&x| x.signum() * x.abs().powf(q)).collect();
    lp_sphere_project(&raw, p).ok()
}

struct StartResult {
    value: f64,
    point: Point,
    converged: bool,
}

fn run_single_start(
    poly: &Multipolynomial,
    p: f64,
    cfg: &OptimizerConfig,
    start: usize,
) -> StartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, &[start as u64]));
    let dims = poly.dims().to_vec();
    let mut x = Point(
        dims.iter()
            .map(|&d| {
                let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                lp_sphere_project(&g, p).unwrap_or_else(|_| vec![1.0; d])
            })
            .collect(),
    );
    let m = poly.degrees().num_blocks();
    let mut value = poly.evaluate(&x).unwrap().abs();
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        for i in 0..m {
            let grad = poly.gradient(&x).unwrap();
            if poly.degrees().degree(i) == 1 {
                // Linear in this block: the frozen functional's coefficients
                // are exactly the block gradient; jump to its lp maximizer.
                if let Some(y) = dual_maximizer(&grad.0[i], p) {
                    x.0[i] = y;
                }
            } else {
                let f0 = poly.evaluate(&x).unwrap();
                let dir: Vec<f64> = if f0 < 0.0 {
                    grad.0[i].iter().map(|g| -g).collect()
                } else {
                    grad.0[i].clone()
                };
                let mut step = cfg.step_init;
                for _ in 0..40 {
                    let raw: Vec<f64> = x.0[i]
                        .iter()
                        .zip(&dir)
                        .map(|(xi, di)| xi + step * di)
                        .collect();
                    let cand = if p.is_infinite() {
                        raw.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
                    } else {
                        match lp_sphere_project(&raw, p) {
                            Ok(v) => v,
                            Err(_) => {
                                step *= 0.5;
                                continue;
                            }
                        }
                    };
                    let old = std::mem::replace(&mut x.0[i], cand);
                    if poly.evaluate(&x).unwrap().abs() > f0.abs() {
                        break;
                    }
                    x.0[i] = old;
                    step *= 0.5;
                }
            }
        }
        let new_value = poly.evaluate(&x).unwrap().abs();
        if new_value - value <= cfg.rel_tol * value.max(1.0) {
            converged = true;
            break;
        }
        value = new_value;
    }
    StartResult {
        value: poly.evaluate(&x).unwrap().abs(),
        point: x,
        converged,
    }
}

/// Multi-start lower-bound estimate of sup |P| over the product of lp balls.
///
/// Blocks of degree 1 are updated by the exact lp duality maximizer of the
/// frozen linear functional; other blocks by projected gradient steps with
/// backtracking. Deterministic for a fixed seed, independent of worker count.
pub fn sup_norm_estimate(
    poly: &Multipolynomial,
    p: f64,
    cfg: &OptimizerConfig,
) -> Result<NormEstimate> {
    check_p(p)?;
    cfg.validate()?;
    let results: Vec<StartResult> = (0..cfg.starts)
        .into_par_iter()
        .map(|start| run_single_start(poly, p, cfg, start))
        .collect();
    let converged_starts = results.iter().filter(|r| r.converged).count();
    // Ties keep the first start in seeded order.
    let best = results
        .iter()
        .enumerate()
        .fold(0usize, |bi, (i, r)| if r.value > results[bi].value { i } else { bi });
    let method = if (0..poly.degrees().num_blocks()).all(|i| poly.degrees().degree(i) == 1) {
        NormMethod::AlternatingDual
    } else {
        NormMethod::GradientAscent
    };
    Ok(NormEstimate {
        value: results[best].value,
        method,
        starts: cfg.starts,
        converged_starts,
        best_point: results[best].point.clone(),
    })
}

/// Exact sup-norm at p = infinity for multi-affine polynomials.
///
/// Enumerates sign vertices of all blocks but the last with a Gray code; the
/// last block (when it has degree 1) is resolved in closed form as the l1
/// norm of the induced linear functional. When the last block has higher
/// degree, only the final coordinate is resolved in closed form.
pub fn sup_norm_exact_vertex(poly: &Multipolynomial) -> Result<NormEstimate> {
    sup_norm_exact_vertex_with_budget(poly, DEFAULT_VERTEX_BUDGET)
}

pub fn sup_norm_exact_vertex_with_budget(
    poly: &Multipolynomial,
    budget: u64,
) -> Result<NormEstimate> {
    if !poly.is_multi_affine() {
        return Err(Error::InvalidParameter(
            "vertex oracle requires all exponents <= 1".into(),
        ));
    }
    let dims = poly.dims().to_vec();
    let m = dims.len();
    let total: usize = dims.iter().sum();
    // Global coordinate ids: block-major.
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0usize, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    // Resolved coordinates: the whole last block when linear in it, else just
    // the final coordinate (multi-affine implies linearity per coordinate).
    let resolved: Vec<usize> = if poly.degrees().degree(m - 1) == 1 {
        (offsets[m - 1]..total).collect()
    } else {
        vec![total - 1]
    };
    let resolved_pos = |g: usize| resolved.iter().position(|&r| r == g);
    let enumerated: Vec<usize> = (0..total).filter(|g| resolved_pos(*g).is_none()).collect();
    let e = enumerated.len();
    if e >= 63 || (1u64 << e) > budget {
        return Err(Error::BudgetExceeded(format!(
            "vertex oracle would enumerate 2^{e} vertices, budget {budget}"
        )));
    }
    let enum_pos: Vec<Option<usize>> = (0..total)
        .map(|g| enumerated.iter().position(|&x| x == g))
        .collect();

    // Per term: signed coefficient (flips with enumerated coords) and the
    // index of its single resolved coordinate, if any.
    let mut signs: Vec<f64> = Vec::new();
    let mut term_resolved: Vec<Option<usize>> = Vec::new();
    let mut terms_with: Vec<Vec<usize>> = vec![Vec::new(); e];
    for (t, (alpha, coeff)) in poly.terms().enumerate() {
        signs.push(coeff);
        let mut res = None;
        for (bi, block) in alpha.blocks().iter().enumerate() {
            for (bj, &a) in block.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let g = offsets[bi] + bj;
                if let Some(r) = resolved_pos(g) {
                    res = Some(r);
                } else {
                    terms_with[enum_pos[g].unwrap()].push(t);
                }
            }
        }
        term_resolved.push(res);
    }

    let objective = |signs: &[f64]| -> (f64, f64, Vec<f64>) {
        let mut a = 0.0;
        let mut c = vec![0.0; resolved.len()];
        for (t, &s) in signs.iter().enumerate() {
            match term_resolved[t] {
                Some(r) => c[r] += s,
                None => a += s,
            }
        }
        let value = a.abs() + c.iter().map(|x| x.abs()).sum::<f64>();
        (value, a, c)
    };

    let mut cur = signs.clone();
    let (mut best_value, _, _) = objective(&cur);
    let mut best_mask: u64 = 0;
    let mut mask: u64 = 0;
    for k in 1u64..(1u64 << e) {
        let q = k.trailing_zeros() as usize;
        for &t in &terms_with[q] {
            cur[t] = -cur[t];
        }
        mask ^= 1 << q;
        let (v, _, _) = objective(&cur);
        if v > best_value {
            best_value = v;
            best_mask = mask;
        }
    }

    // Recompute exactly at the best mask and build the witness point.
    let mut at_best = signs.clone();
    for (pos, _) in enumerated.iter().enumerate() {
        if best_mask >> pos & 1 == 1 {
            for &t in &terms_with[pos] {
                at_best[t] = -at_best[t];
            }
        }
    }
    let (value, a, c) = objective(&at_best);
    let s0 = if a < 0.0 { -1.0 } else { 1.0 };
    let mut point = Point::ones(&dims);
    for (pos, &g) in enumerated.iter().enumerate() {
        let (bi, bj) = global_to_block(g, &offsets, &dims);
        point.0[bi][bj] = if best_mask >> pos & 1 == 1 { -1.0 } else { 1.0 };
    }
    for (r, &g) in resolved.iter().enumerate() {
        let (bi, bj) = global_to_block(g, &offsets, &dims);
        point.0[bi][bj] = s0 * if c[r] < 0.0 { -1.0 } else { 1.0 };
    }
    Ok(NormEstimate {
        value,
        method: NormMethod::VertexExact,
        starts: 1,
        converged_starts: 1,
        best_point: point,
    })
}

fn global_to_block(g: usize, offsets: &[usize], dims: &[usize]) -> (usize, usize) {
    for (i, &o) in offsets.iter().enumerate() {
        if g < o + dims[i] {
            return (i, g - o);
        }
    }
    unreachable!()
}

/// Holder upper bound n^((p-M)/p) for the diagonal form T_n; requires p > M.
/// It is attained at x^(i) = n^(-1/p) (1,...,1), so it is the exact norm.
pub fn holder_diagonal_bound(n: usize, total_degree: usize, p: f64) -> Result<f64> {
    if n == 0 || total_degree == 0 {
        return Err(Error::InvalidParameter("n and M must be >= 1".into()));
    }
    if !(p > total_degree as f64) {
        return Err(Error::InvalidParameter(format!(
            "holder_diagonal_bound requires p > M, got p={p}, M={total_degree}"
        )));
    }
    let exponent = if p.is_infinite() {
        1.0
    } else {
        (p - total_degree as f64) / p
    };
    Ok((n as f64).powf(exponent))
}

/// Riesz-Thorin interpolation norm2^theta * norm1^(1-theta), theta = (2q-2)/q.
pub fn interpolated_norm_bound(norm2: f64, norm1: f64, q: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q must lie in [1,2], got {q}")));
    }
    if norm2 < 0.0 || norm1 < 0.0 {
        return Err(Error::InvalidParameter("norms must be nonnegative".into()));
    }
    let theta = (2.0 * q - 2.0) / q;
    Ok(norm2.powf(theta) * norm1.powf(1.0 - theta))
}
