use nalgebra::{DMatrix, DVector};

use super::{component_schedule, Algorithm, RunConfig, EMPTY_COMPONENT_WEIGHT, SIMPLEX_TOL};
use crate::density::{log_sum_exp, Gaussian};
use crate::error::{MixtureError, Result};
use crate::functionals::normalize_rows;
use crate::params::{Dataset, MixtureParams};

/// Iteration state shared by the three algorithms.
///
/// Keeps `log φ(y_i | μ_j, Σ_j)` for every observation and component and
/// refreshes only the columns whose component moved, so each cycle costs
/// exactly `J·n` component-density evaluations whatever the algorithm.
/// Responsibilities are always renormalized from the cache at the current
/// parameters before they are used.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    data: &'a Dataset,
    theta: MixtureParams,
    floor: f64,
    /// Row-major `n × J` log component densities at `theta`.
    log_phi: Vec<f64>,
    iteration: u64,
    density_evaluations: u64,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    /// Builds the density cache at `theta` (costs `J·n` evaluations).
    pub fn new(theta: MixtureParams, data: &'a Dataset, variance_floor: f64) -> Result<Self> {
        data.ensure_dim(theta.dim())?;
        let n_components = theta.n_components();
        let mut stepper = Self {
            data,
            floor: variance_floor,
            log_phi: vec![0.0; data.len() * n_components],
            iteration: 0,
            density_evaluations: 0,
            scratch: vec![0.0; theta.dim()],
            theta,
        };
        for j in 0..n_components {
            stepper.refresh_component(j)?;
        }
        Ok(stepper)
    }

    pub fn params(&self) -> &MixtureParams {
        &self.theta
    }

    pub fn into_params(self) -> MixtureParams {
        self.theta
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    /// Next CEMM iteration index `k`.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn set_iteration(&mut self, k: u64) {
        self.iteration = k;
    }

    /// Number of `φ(y_i | μ_j, Σ_j)` evaluations performed so far.
    pub fn density_evaluations(&self) -> u64 {
        self.density_evaluations
    }

    pub fn variance_floor(&self) -> f64 {
        self.floor
    }

    fn n_components(&self) -> usize {
        self.theta.n_components()
    }

    fn refresh_component(&mut self, j: usize) -> Result<()> {
        let gaussian =
            Gaussian::for_component(j, &self.theta.means()[j], &self.theta.covariances()[j])?;
        self.fill_column(j, &gaussian);
        Ok(())
    }

    fn fill_column(&mut self, j: usize, gaussian: &Gaussian) {
        let n_components = self.n_components();
        for (i, y) in self.data.observations().iter().enumerate() {
            self.log_phi[i * n_components + j] = gaussian.log_density_with(y, &mut self.scratch);
        }
        self.density_evaluations += self.data.len() as u64;
    }

    fn log_joint_matrix(&self) -> DMatrix<f64> {
        let n_components = self.n_components();
        let log_p: Vec<f64> = self.theta.proportions().iter().map(|p| p.ln()).collect();
        DMatrix::from_fn(self.data.len(), n_components, |i, j| {
            log_p[j] + self.log_phi[i * n_components + j]
        })
    }

    /// `log t_ij` at the current parameters.
    pub fn log_responsibilities(&self) -> Result<DMatrix<f64>> {
        Ok(normalize_rows(&self.log_joint_matrix())?.0)
    }

    /// `L(θ | y)` at the current parameters, from the cache.
    pub fn log_likelihood(&self) -> Result<f64> {
        Ok(normalize_rows(&self.log_joint_matrix())?.1.iter().sum())
    }

    /// Column `j` of the responsibilities at the current parameters.
    fn responsibility_column(&self, j: usize) -> Result<Vec<f64>> {
        let n_components = self.n_components();
        let log_p: Vec<f64> = self.theta.proportions().iter().map(|p| p.ln()).collect();
        let mut row = vec![0.0; n_components];
        let mut column = Vec::with_capacity(self.data.len());
        for i in 0..self.data.len() {
            for (l, slot) in row.iter_mut().enumerate() {
                *slot = log_p[l] + self.log_phi[i * n_components + l];
            }
            let lse = log_sum_exp(&row);
            if !lse.is_finite() {
                return Err(MixtureError::NumericalUnderflow { observation: i });
            }
            column.push((row[j] - lse).exp());
        }
        Ok(column)
    }

    /// One EM cycle: full E-step, then the simultaneous M-step.
    pub fn em_cycle(&mut self) -> Result<()> {
        self.theta.check_simplex(SIMPLEX_TOL)?;
        let log_t = self.log_responsibilities()?;
        let n_components = self.n_components();
        let columns: Vec<Vec<f64>> = (0..n_components)
            .map(|j| log_t.column(j).iter().map(|v| v.exp()).collect())
            .collect();
        for (j, column) in columns.iter().enumerate() {
            check_weight(j, column)?;
        }
        let n = self.data.len() as f64;
        let mut blocks = Vec::with_capacity(n_components);
        for (j, column) in columns.iter().enumerate() {
            let (weight, mean, cov) = weighted_moments(self.data, column, self.floor);
            let gaussian = Gaussian::for_component(j, &mean, &cov)?;
            blocks.push((weight / n, mean, cov, gaussian));
        }
        for (j, (p, mean, cov, gaussian)) in blocks.into_iter().enumerate() {
            self.theta.set_block(j, p, mean, cov);
            self.fill_column(j, &gaussian);
        }
        Ok(())
    }

    /// One CEMM iteration on component `j` (zero-based). Other blocks are
    /// left untouched and the proportions are not renormalized.
    pub fn cemm_iteration(&mut self, j: usize) -> Result<()> {
        self.ensure_component(j)?;
        let column = self.responsibility_column(j)?;
        check_weight(j, &column)?;
        let (weight, mean, cov) = weighted_moments(self.data, &column, self.floor);
        let gaussian = Gaussian::for_component(j, &mean, &cov)?;
        self.theta
            .set_block(j, weight / self.data.len() as f64, mean, cov);
        self.fill_column(j, &gaussian);
        Ok(())
    }

    /// `J` CEMM iterations following the cyclic schedule from the current
    /// iteration index.
    pub fn cemm_cycle(&mut self) -> Result<()> {
        for _ in 0..self.n_components() {
            let j = component_schedule(self.iteration, self.n_components());
            self.cemm_iteration(j)?;
            self.iteration += 1;
        }
        Ok(())
    }

    /// SAGE location iteration: updates `(μ_j, Σ_j)` only.
    pub fn sage_location_iteration(&mut self, j: usize) -> Result<()> {
        self.ensure_component(j)?;
        let column = self.responsibility_column(j)?;
        check_weight(j, &column)?;
        let (_, mean, cov) = weighted_moments(self.data, &column, self.floor);
        let gaussian = Gaussian::for_component(j, &mean, &cov)?;
        self.theta.set_location(j, mean, cov);
        self.fill_column(j, &gaussian);
        Ok(())
    }

    /// SAGE proportions iteration: `p_j = (1/n) Σ_i t_ij` for all `j` at once.
    pub fn sage_proportions_iteration(&mut self) -> Result<()> {
        let log_t = self.log_responsibilities()?;
        let n = self.data.len() as f64;
        let mut proportions = Vec::with_capacity(self.n_components());
        for j in 0..self.n_components() {
            let column: Vec<f64> = log_t.column(j).iter().map(|v| v.exp()).collect();
            let weight = check_weight(j, &column)?;
            proportions.push(weight / n);
        }
        self.theta.set_proportions(proportions);
        Ok(())
    }

    /// `J + 1` SAGE iterations: each component location in order, then
    /// all proportions jointly.
    pub fn sage_cycle(&mut self) -> Result<()> {
        self.theta.check_simplex(SIMPLEX_TOL)?;
        for j in 0..self.n_components() {
            self.sage_location_iteration(j)?;
        }
        self.sage_proportions_iteration()
    }

    pub fn cycle(&mut self, algorithm: Algorithm) -> Result<()> {
        match algorithm {
            Algorithm::Em => self.em_cycle(),
            Algorithm::Cemm => self.cemm_cycle(),
            Algorithm::Sage => self.sage_cycle(),
        }
    }

    fn ensure_component(&self, j: usize) -> Result<()> {
        if j >= self.n_components() {
            return Err(MixtureError::InvalidParams(format!(
                "component index {j} out of range for {} components",
                self.n_components()
            )));
        }
        Ok(())
    }
}

fn check_weight(j: usize, column: &[f64]) -> Result<f64> {
    let weight: f64 = column.iter().sum();
    if weight.is_nan() || weight < EMPTY_COMPONENT_WEIGHT {
        return Err(MixtureError::EmptyComponent {
            component: j,
            weight,
        });
    }
    Ok(weight)
}

/// Weighted mean and weighted scatter about that new mean, followed by
/// exact symmetrization and the variance floor.
fn weighted_moments(
    data: &Dataset,
    weights: &[f64],
    floor: f64,
) -> (f64, DVector<f64>, DMatrix<f64>) {
    let dim = data.dim();
    let weight: f64 = weights.iter().sum();
    let mut mean = DVector::zeros(dim);
    for (y, &t) in data.observations().iter().zip(weights) {
        mean.axpy(t, y, 1.0);
    }
    mean /= weight;
    let mut scatter = DMatrix::zeros(dim, dim);
    let mut centered = DVector::zeros(dim);
    for (y, &t) in data.observations().iter().zip(weights) {
        centered.copy_from(y);
        centered -= &mean;
        scatter.ger(t, &centered, &centered, 1.0);
    }
    scatter /= weight;
    (weight, mean, apply_variance_floor(scatter, floor))
}

/// Symmetrizes `cov` and raises every eigenvalue below `floor` to `floor`.
pub(crate) fn apply_variance_floor(cov: DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = (&cov + cov.transpose()) * 0.5;
    if sym.nrows() == 1 {
        return DMatrix::from_element(1, 1, sym[(0, 0)].max(floor));
    }
    let eigen = sym.clone().symmetric_eigen();
    if eigen.eigenvalues.iter().all(|&v| v >= floor) {
        return sym;
    }
    let clamped = eigen.eigenvalues.map(|v| v.max(floor));
    let rebuilt =
        &eigen.eigenvectors * DMatrix::from_diagonal(&clamped) * eigen.eigenvectors.transpose();
    (&rebuilt + rebuilt.transpose()) * 0.5
}

/// One EM cycle from `theta`. Requires `Σ p = 1` within `1e-9`.
pub fn em_cycle(theta: &MixtureParams, data: &Dataset, cfg: &RunConfig) -> Result<MixtureParams> {
    theta.check_simplex(SIMPLEX_TOL)?;
    let mut stepper = Stepper::new(theta.clone(), data, cfg.resolve_floor(data))?;
    stepper.em_cycle()?;
    Ok(stepper.into_params())
}

/// One CEMM iteration updating component `j` (zero-based).
pub fn cemm_iteration(
    theta: &MixtureParams,
    data: &Dataset,
    j: usize,
    cfg: &RunConfig,
) -> Result<MixtureParams> {
    let mut stepper = Stepper::new(theta.clone(), data, cfg.resolve_floor(data))?;
    stepper.cemm_iteration(j)?;
    Ok(stepper.into_params())
}

/// `J` CEMM iterations starting at iteration index `k0`.
pub fn cemm_cycle(
    theta: &MixtureParams,
    data: &Dataset,
    k0: u64,
    cfg: &RunConfig,
) -> Result<MixtureParams> {
    let mut stepper = Stepper::new(theta.clone(), data, cfg.resolve_floor(data))?;
    stepper.set_iteration(k0);
    stepper.cemm_cycle()?;
    Ok(stepper.into_params())
}

/// One SAGE cycle (`J + 1` iterations). Requires `Σ p = 1` within `1e-9`.
pub fn sage_cycle(theta: &MixtureParams, data: &Dataset, cfg: &RunConfig) -> Result<MixtureParams> {
    theta.check_simplex(SIMPLEX_TOL)?;
    let mut stepper = Stepper::new(theta.clone(), data, cfg.resolve_floor(data))?;
    stepper.sage_cycle()?;
    Ok(stepper.into_params())
}
