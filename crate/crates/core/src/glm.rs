//! Logistic regression by maximum likelihood (Newton/IRLS) with Wald
//! inference and McFadden pseudo-R-squared.
//!
//! Generic over the floating-point scalar; `f64` is the default used
//! everywhere else in the crate (aliases at the crate root). Inference
//! follows the usual GLM summary conventions: standard errors from the
//! inverse observed information, z = beta/SE, two-sided p-values from
//! the standard normal.

// Indexed loops over several parallel slices at once read more clearly
// than zipped iterators in the linear-algebra kernels below.
#![allow(clippy::needless_range_loop)]

use num_traits::Float;
use serde::Serialize;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use thiserror::Error;

/// Scalar bound for the regression routines.
pub trait Scalar: Float + Sum + Debug + Display + LowerExp + Serialize + 'static {
    fn c(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn c(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn c(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

#[derive(Debug, Error)]
pub enum GlmError {
    #[error("design matrix row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite covariate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("design matrix has {rows} rows but {responses} responses")]
    ResponseLength { rows: usize, responses: usize },
    #[error("responses must be 0 or 1")]
    NonBinaryResponse,
    #[error("both response classes must be present")]
    SingleClass,
    #[error("need at least as many rows ({rows}) as columns ({cols}) for an unpenalized fit")]
    Underdetermined { rows: usize, cols: usize },
    #[error("quasi-separation detected: |beta| exceeded {limit} at iteration {iteration}")]
    Separation { iteration: usize, limit: f64 },
    #[error("observed information matrix is singular at iteration {iteration}")]
    Singular { iteration: usize },
    #[error(
        "did not converge in {max_iter} iterations (last max |score| = {score_norm:e})"
    )]
    NotConverged {
        max_iter: usize,
        score_norm: f64,
        /// Last iterate, for diagnostics.
        last_coef: Vec<f64>,
    },
    #[error("null log-likelihood is zero; pseudo R-squared undefined")]
    DegenerateNull,
}

/// Dense n x p design matrix with named columns. The intercept column
/// (all ones, named "intercept") must be included explicitly.
#[derive(Debug, Clone)]
pub struct DesignMatrix<F: Scalar> {
    names: Vec<String>,
    data: Vec<F>, // row-major
    rows: usize,
}

pub const INTERCEPT: &str = "intercept";

impl<F: Scalar> DesignMatrix<F> {
    pub fn from_rows(names: Vec<String>, rows: Vec<Vec<F>>) -> Result<Self, GlmError> {
        let p = names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(GlmError::RaggedRow {
                    row: i,
                    expected: p,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(GlmError::NonFinite { row: i, col: j });
                }
            }
        }
        let n = rows.len();
        Ok(DesignMatrix {
            names,
            data: rows.into_iter().flatten().collect(),
            rows: n,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[F] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    fn intercept_col(&self) -> Option<usize> {
        self.names.iter().position(|n| n == INTERCEPT)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Convergence on both the score max-norm and the relative
    /// log-likelihood change.
    pub tol: f64,
    /// Optional ridge penalty on non-intercept coefficients. Zero for
    /// pure MLE.
    pub l2: f64,
    /// |beta| above this triggers the separation error.
    pub separation_limit: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 100,
            tol: 1e-8,
            l2: 0.0,
            separation_limit: 30.0,
        }
    }
}

/// Result of a converged logistic fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult<F: Scalar> {
    pub names: Vec<String>,
    pub coef: Vec<F>,
    pub std_err: Vec<F>,
    pub z_value: Vec<F>,
    pub p_value: Vec<F>,
    pub log_likelihood: F,
    pub null_log_likelihood: F,
    pub pseudo_r2: F,
    pub converged: bool,
    pub iterations: usize,
}

impl<F: Scalar> FitResult<F> {
    pub fn coef_named(&self, name: &str) -> Option<F> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coef[i])
    }

    pub fn p_value_named(&self, name: &str) -> Option<F> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.p_value[i])
    }

    /// Regression summary in the shape of the bias-analysis tables: a
    /// coefficient row and a p row per variable, then pseudo-R2.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14}{:>12}{:>12}{:>10}{:>10}\n",
            "variable", "beta", "se", "z", "p"
        ));
        for i in 0..self.names.len() {
            out.push_str(&format!(
                "{:<14}{:>12.4}{:>12.4}{:>10.3}{:>10}\n",
                self.names[i],
                self.coef[i].to_f64(),
                self.std_err[i].to_f64(),
                self.z_value[i].to_f64(),
                format_p(self.p_value[i].to_f64()),
            ));
        }
        out.push_str(&format!("{:<14}{:>12.4}\n", "Pseudo R2", self.pseudo_r2.to_f64()));
        out
    }
}

fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

/// Overflow-safe logistic function.
pub fn predict_proba<F: Scalar>(coef: &[F], x_row: &[F]) -> F {
    let eta: F = coef.iter().zip(x_row).map(|(&b, &x)| b * x).sum();
    sigmoid(eta)
}

pub fn sigmoid<F: Scalar>(eta: F) -> F {
    if eta >= F::zero() {
        F::one() / (F::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (F::one() + e)
    }
}

/// log(1 + exp(eta)) without overflow.
fn log1p_exp<F: Scalar>(eta: F) -> F {
    if eta > F::zero() {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// McFadden pseudo R-squared, `1 - ll/ll0`.
pub fn mcfadden_pseudo_r2<F: Scalar>(ll: F, ll0: F) -> Result<F, GlmError> {
    if ll0 == F::zero() {
        return Err(GlmError::DegenerateNull);
    }
    Ok(F::one() - ll / ll0)
}

/// Two-sided p-value for a standard-normal z statistic.
pub fn normal_two_sided_p<F: Scalar>(z: F) -> F {
    erfc(z.abs() / F::c(std::f64::consts::SQRT_2))
}

/// Complementary error function (rational Chebyshev approximation,
/// relative error < 1.2e-7).
fn erfc<F: Scalar>(x: F) -> F {
    let z = x.abs();
    let t = F::one() / (F::one() + z / F::c(2.0));
    let poly = F::c(-1.265_512_23)
        + t * (F::c(1.000_023_68)
            + t * (F::c(0.374_091_96)
                + t * (F::c(0.096_784_18)
                    + t * (F::c(-0.186_288_06)
                        + t * (F::c(0.278_868_07)
                            + t * (F::c(-1.135_203_98)
                                + t * (F::c(1.488_515_87)
                                    + t * (F::c(-0.822_152_23) + t * F::c(0.170_872_77)))))))));
    let ans = t * (-z * z + poly).exp();
    if x >= F::zero() {
        ans
    } else {
        F::c(2.0) - ans
    }
}

/// Fit a binomial-logit GLM by Newton iterations on the (optionally
/// ridge-penalized) log-likelihood.
pub fn fit_logistic<F: Scalar>(
    x: &DesignMatrix<F>,
    y: &[u8],
    config: &FitConfig,
) -> Result<FitResult<F>, GlmError> {
    let n = x.n_rows();
    let p = x.n_cols();
    if y.len() != n {
        return Err(GlmError::ResponseLength {
            rows: n,
            responses: y.len(),
        });
    }
    if y.iter().any(|&v| v > 1) {
        return Err(GlmError::NonBinaryResponse);
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == n {
        return Err(GlmError::SingleClass);
    }
    if config.l2 == 0.0 && n < p {
        return Err(GlmError::Underdetermined { rows: n, cols: p });
    }

    let l2 = F::c(config.l2);
    let tol = F::c(config.tol);
    let intercept = x.intercept_col();
    let penalized = |j: usize| config.l2 > 0.0 && Some(j) != intercept;

    let yf: Vec<F> = y.iter().map(|&v| F::c(v as f64)).collect();
    let mut beta = vec![F::zero(); p];
    let mut mu = vec![F::zero(); n];
    let mut ll_prev = F::neg_infinity();
    let mut converged = false;
    let mut iterations = 0;
    let mut score_norm = F::infinity();

    let objective = |beta: &[F], mu_out: &mut [F]| -> F {
        let mut ll = F::zero();
        for i in 0..n {
            let eta: F = beta.iter().zip(x.row(i)).map(|(&b, &v)| b * v).sum();
            mu_out[i] = sigmoid(eta);
            ll = ll + yf[i] * eta - log1p_exp(eta);
        }
        for j in 0..p {
            if penalized(j) {
                ll = ll - l2 * beta[j] * beta[j] / F::c(2.0);
            }
        }
        ll
    };

    for iter in 1..=config.max_iter {
        iterations = iter;
        let ll = objective(&beta, &mut mu);

        // penalized score
        let mut grad = vec![F::zero(); p];
        for i in 0..n {
            let resid = yf[i] - mu[i];
            for (j, &v) in x.row(i).iter().enumerate() {
                grad[j] = grad[j] + resid * v;
            }
        }
        for j in 0..p {
            if penalized(j) {
                grad[j] = grad[j] - l2 * beta[j];
            }
        }
        score_norm = grad.iter().fold(F::zero(), |m, g| m.max(g.abs()));

        let rel_change = (ll - ll_prev).abs() / (ll.abs() + F::one());
        if score_norm < tol || (iter > 1 && rel_change < tol) {
            converged = true;
            break;
        }
        ll_prev = ll;

        // observed information: X^T W X (+ l2 on penalized diagonal)
        let mut info = vec![F::zero(); p * p];
        for i in 0..n {
            let w = mu[i] * (F::one() - mu[i]);
            let row = x.row(i);
            for a in 0..p {
                let wa = w * row[a];
                for b in a..p {
                    info[a * p + b] = info[a * p + b] + wa * row[b];
                }
            }
        }
        for j in 0..p {
            if penalized(j) {
                info[j * p + j] = info[j * p + j] + l2;
            }
        }
        mirror_lower(&mut info, p);

        let chol = cholesky(&info, p).ok_or(GlmError::Singular { iteration: iter })?;
        let step = chol_solve(&chol, p, &grad);

        // step-halving keeps the objective non-decreasing
        let mut scale = F::one();
        let mut accepted = false;
        for _ in 0..12 {
            let candidate: Vec<F> = beta
                .iter()
                .zip(&step)
                .map(|(&b, &s)| b + scale * s)
                .collect();
            let mut scratch = vec![F::zero(); n];
            if objective(&candidate, &mut scratch) >= ll {
                beta = candidate;
                accepted = true;
                break;
            }
            scale = scale / F::c(2.0);
        }
        if !accepted {
            // full step anyway; convergence checks will catch divergence
            for (b, s) in beta.iter_mut().zip(&step) {
                *b = *b + *s;
            }
        }

        let limit = F::c(config.separation_limit);
        if beta.iter().any(|b| b.abs() > limit) {
            return Err(GlmError::Separation {
                iteration: iter,
                limit: config.separation_limit,
            });
        }
    }

    if !converged {
        return Err(GlmError::NotConverged {
            max_iter: config.max_iter,
            score_norm: score_norm.to_f64(),
            last_coef: beta.iter().map(|b| Scalar::to_f64(*b)).collect(),
        });
    }

    // unpenalized log-likelihood at the estimate
    let mut ll_hat = F::zero();
    for i in 0..n {
        let eta: F = beta.iter().zip(x.row(i)).map(|(&b, &v)| b * v).sum();
        ll_hat = ll_hat + yf[i] * eta - log1p_exp(eta);
    }

    // A perfect unpenalized fit means complete separation: the MLE is
    // at infinity and the stall point depends on covariate scale, so
    // the |beta| check alone can miss it.
    if config.l2 == 0.0 && ll_hat > F::c(-1e-6) * F::c(n as f64) {
        return Err(GlmError::Separation {
            iteration: iterations,
            limit: config.separation_limit,
        });
    }

    // SEs from the inverse observed information; with a ridge penalty
    // this is the penalized information, matching the fitted objective
    // (the unpenalized information can be exactly singular on one-hot
    // indicator designs).
    let mut info = vec![F::zero(); p * p];
    for i in 0..n {
        let eta: F = beta.iter().zip(x.row(i)).map(|(&b, &v)| b * v).sum();
        let m = sigmoid(eta);
        let w = m * (F::one() - m);
        let row = x.row(i);
        for a in 0..p {
            let wa = w * row[a];
            for b in a..p {
                info[a * p + b] = info[a * p + b] + wa * row[b];
            }
        }
    }
    for j in 0..p {
        if penalized(j) {
            info[j * p + j] = info[j * p + j] + l2;
        }
    }
    mirror_lower(&mut info, p);
    let chol = cholesky(&info, p).ok_or(GlmError::Singular {
        iteration: iterations,
    })?;
    let mut std_err = vec![F::zero(); p];
    for j in 0..p {
        let mut unit = vec![F::zero(); p];
        unit[j] = F::one();
        let col = chol_solve(&chol, p, &unit);
        std_err[j] = col[j].sqrt();
    }

    let z_value: Vec<F> = beta
        .iter()
        .zip(&std_err)
        .map(|(&b, &s)| b / s)
        .collect();
    let p_value: Vec<F> = z_value.iter().map(|&z| normal_two_sided_p(z)).collect();

    // intercept-only null model
    let ybar = F::c(pos as f64 / n as f64);
    let ll0 = F::c(n as f64) * (ybar * ybar.ln() + (F::one() - ybar) * (F::one() - ybar).ln());
    let pseudo_r2 = mcfadden_pseudo_r2(ll_hat, ll0)?;

    Ok(FitResult {
        names: x.names().to_vec(),
        coef: beta,
        std_err,
        z_value,
        p_value,
        log_likelihood: ll_hat,
        null_log_likelihood: ll0,
        pseudo_r2,
        converged,
        iterations,
    })
}

fn mirror_lower<F: Scalar>(m: &mut [F], p: usize) {
    for a in 0..p {
        for b in 0..a {
            m[a * p + b] = m[b * p + a];
        }
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix, or None if a
/// pivot is not positive.
fn cholesky<F: Scalar>(m: &[F], p: usize) -> Option<Vec<F>> {
    let mut l = vec![F::zero(); p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = m[i * p + j];
            for k in 0..j {
                s = s - l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if s <= F::zero() || !s.is_finite() {
                    return None;
                }
                l[i * p + i] = s.sqrt();
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    Some(l)
}

fn chol_solve<F: Scalar>(l: &[F], p: usize, b: &[F]) -> Vec<F> {
    let mut y = vec![F::zero(); p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * p + k] * y[k];
        }
        y[i] = s / l[i * p + i];
    }
    let mut x = vec![F::zero(); p];
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in (i + 1)..p {
            s = s - l[k * p + i] * x[k];
        }
        x[i] = s / l[i * p + i];
    }
    x
}

/// Convenience constructor: prepend an intercept column to raw
/// covariate rows.
pub fn design_with_intercept<F: Scalar>(
    names: &[&str],
    rows: &[Vec<F>],
) -> Result<DesignMatrix<F>, GlmError> {
    let mut full_names = vec![INTERCEPT.to_string()];
    full_names.extend(names.iter().map(|s| s.to_string()));
    let full_rows: Vec<Vec<F>> = rows
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(r.len() + 1);
            row.push(F::one());
            row.extend_from_slice(r);
            row
        })
        .collect();
    DesignMatrix::from_rows(full_names, full_rows)
}
