//! Brute-force univariate reference updates, written directly from the
//! update formulas with plain densities (no log domain, no caching). Used to
//! cross-check the library engines on small instances.

use std::f64::consts::PI;

/// Univariate mixture parameters as plain vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Univariate {
    pub p: Vec<f64>,
    pub mu: Vec<f64>,
    pub var: Vec<f64>,
}

pub fn normal_pdf(y: f64, mu: f64, var: f64) -> f64 {
    (-(y - mu) * (y - mu) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// `t_ij = p_j φ_j(y_i) / Σ_ℓ p_ℓ φ_ℓ(y_i)`.
pub fn posterior(theta: &Univariate, y: &[f64]) -> Vec<Vec<f64>> {
    y.iter()
        .map(|&yi| {
            let joint: Vec<f64> = (0..theta.p.len())
                .map(|j| theta.p[j] * normal_pdf(yi, theta.mu[j], theta.var[j]))
                .collect();
            let total: f64 = joint.iter().sum();
            joint.iter().map(|v| v / total).collect()
        })
        .collect()
}

fn block_update(t: &[Vec<f64>], y: &[f64], j: usize) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let weight: f64 = t.iter().map(|row| row[j]).sum();
    let mu: f64 = t.iter().zip(y).map(|(row, yi)| row[j] * yi).sum::<f64>() / weight;
    let var: f64 = t
        .iter()
        .zip(y)
        .map(|(row, yi)| row[j] * (yi - mu) * (yi - mu))
        .sum::<f64>()
        / weight;
    (weight / n, mu, var)
}

pub fn em_step(theta: &Univariate, y: &[f64]) -> Univariate {
    let t = posterior(theta, y);
    let mut out = theta.clone();
    for j in 0..theta.p.len() {
        let (p, mu, var) = block_update(&t, y, j);
        out.p[j] = p;
        out.mu[j] = mu;
        out.var[j] = var;
    }
    out
}

pub fn cemm_step(theta: &Univariate, y: &[f64], j: usize) -> Univariate {
    let t = posterior(theta, y);
    let (p, mu, var) = block_update(&t, y, j);
    let mut out = theta.clone();
    out.p[j] = p;
    out.mu[j] = mu;
    out.var[j] = var;
    out
}

pub fn sage_step(theta: &Univariate, y: &[f64]) -> Univariate {
    let mut out = theta.clone();
    for j in 0..theta.p.len() {
        let t = posterior(&out, y);
        let (_, mu, var) = block_update(&t, y, j);
        out.mu[j] = mu;
        out.var[j] = var;
    }
    let t = posterior(&out, y);
    for j in 0..theta.p.len() {
        out.p[j] = t.iter().map(|row| row[j]).sum::<f64>() / y.len() as f64;
    }
    out
}

/// Largest absolute difference between two parameter sets.
pub fn max_abs_diff(a: &Univariate, b: &Univariate) -> f64 {
    a.p.iter()
        .zip(&b.p)
        .chain(a.mu.iter().zip(&b.mu))
        .chain(a.var.iter().zip(&b.var))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn from_params(theta: &cemm::MixtureParams) -> Univariate {
    assert_eq!(theta.dim(), 1, "oracle is univariate");
    Univariate {
        p: theta.proportions().to_vec(),
        mu: theta.means().iter().map(|m| m[0]).collect(),
        var: theta.covariances().iter().map(|c| c[(0, 0)]).collect(),
    }
}

/// The four-point, two-component instance used for oracle comparisons.
pub fn toy_instance() -> (Univariate, Vec<f64>) {
    (
        Univariate {
            p: vec![0.5, 0.5],
            mu: vec![0.0, 3.0],
            var: vec![1.0, 1.0],
        },
        vec![-1.0, 0.0, 1.0, 4.0],
    )
}
