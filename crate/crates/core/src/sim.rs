//! Correlated growth trajectories and Monte-Carlo replication of ISRP
//! sampling distributions.
//!
//! Rows are multivariate normal with the model's mean profile and a Koopman
//! covariance. Replicate `i` of a plan draws from `ChaCha8(seed)` on stream
//! `i`, so any replicate can be regenerated alone and results do not depend
//! on scheduling.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::TrajectoryMatrix;
use crate::error::{Error, Result};
use crate::isrp::{
    baseline_of, delta_variance, estimate_with_gradient, window_len, ProfileOptions,
};
use crate::models::{self, ModelId, Parent};
use crate::par::{map_indexed, Execution};
use crate::params::{ParameterSet, TimeGrid};

/// Stationary covariance `Σ_ij = σ² ρ^{|i−j|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoopmanCov {
    pub sigma2: f64,
    pub rho: f64,
}

impl KoopmanCov {
    pub fn new(sigma2: f64, rho: f64) -> Result<Self> {
        let cov = KoopmanCov { sigma2, rho };
        cov.validate()?;
        Ok(cov)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidInput(format!("|rho| must be below 1, got {}", self.rho)));
        }
        Ok(())
    }
}

pub fn koopman_matrix(cov: &KoopmanCov, q: usize) -> Result<DMatrix<f64>> {
    cov.validate()?;
    Ok(DMatrix::from_fn(q, q, |i, j| cov.sigma2 * cov.rho.powi(i.abs_diff(j) as i32)))
}

/// Lower Cholesky factor of a covariance matrix.
pub fn cholesky_lower(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Cholesky::new(sigma.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidInput("covariance matrix is not positive definite".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub model: ModelId,
    pub params: ParameterSet,
    pub grid: TimeGrid,
    pub n: usize,
    pub cov: KoopmanCov,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationPlan {
    /// Logistic `r = 0.3`, `K = 100`, `μ0 = 10` observed at `t = 1..20`,
    /// `σ² = 0.001`, `ρ = 0.1`, 1000 rows, 1000 replications.
    pub fn logistic_reference(seed: u64) -> Self {
        SimulationPlan {
            model: ModelId::constant(Parent::Logistic),
            params: ParameterSet::logistic(0.3, 100.0, 10.0),
            grid: TimeGrid { t0: 1.0, h: 1.0, q: 20 },
            n: 1000,
            cov: KoopmanCov { sigma2: 0.001, rho: 0.1 },
            replications: 1000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.cov.validate()?;
        models::validate(self.model, &self.params)?;
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidInput("replications must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean profile on the grid: closed form where available, RK4 otherwise.
pub fn mean_profile(model: ModelId, params: &ParameterSet, grid: &TimeGrid) -> Result<Vec<f64>> {
    if model.has_closed_form() {
        models::size_on_grid(model, params, grid)
    } else {
        if grid.t0 < 0.0 {
            return Err(Error::Domain("grid must start at a non-negative time".into()));
        }
        models::integrate_at(model, params, &grid.times())
    }
}

/// Mean vector and Cholesky factor, shared across replicates.
#[derive(Debug, Clone)]
pub struct Sampler {
    grid: TimeGrid,
    mean: DVector<f64>,
    chol: DMatrix<f64>,
    n: usize,
    seed: u64,
}

impl Sampler {
    pub fn new(plan: &SimulationPlan) -> Result<Self> {
        plan.validate()?;
        let mean = mean_profile(plan.model, &plan.params, &plan.grid)?;
        let chol = cholesky_lower(&koopman_matrix(&plan.cov, plan.grid.q)?)?;
        Ok(Sampler { grid: plan.grid, mean: DVector::from_vec(mean), chol, n: plan.n, seed: plan.seed })
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    /// The dataset of replicate `index`.
    pub fn draw(&self, index: usize) -> Result<TrajectoryMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let q = self.grid.q;
        let mut values = DMatrix::zeros(self.n, q);
        let mut z = DVector::zeros(q);
        for i in 0..self.n {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let x = &self.mean + &self.chol * &z;
            values.row_mut(i).copy_from(&x.transpose());
        }
        let ids = (1..=self.n).map(|i| i.to_string()).collect();
        TrajectoryMatrix::new(self.grid, ids, values)
    }
}

/// The first dataset of a plan (replicate 0).
pub fn simulate(plan: &SimulationPlan) -> Result<TrajectoryMatrix> {
    Sampler::new(plan)?.draw(0)
}

/// Dataset `index` of a plan.
pub fn simulate_replicate(plan: &SimulationPlan, index: usize) -> Result<TrajectoryMatrix> {
    Sampler::new(plan)?.draw(index)
}

/// Empirical distribution of one interval's estimates across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub j: usize,
    pub t_j: f64,
    pub successes: usize,
    pub failures: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Minimum, 2.5%, 25%, 50%, 75%, 97.5% quantiles and maximum.
    pub quantiles: [f64; 7],
    /// Delta-method variance at the true means and covariance.
    pub delta_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replications: usize,
    pub intervals: Vec<IntervalSummary>,
    /// Simulated sizes at or below zero, over all replicates.
    pub nonpositive_draws: usize,
    /// Per-replicate estimates in interval order; `None` marks a failure.
    #[serde(skip)]
    pub samples: Vec<Vec<Option<f64>>>,
}

pub const QUANTILE_LEVELS: [f64; 7] = [0.0, 0.025, 0.25, 0.5, 0.75, 0.975, 1.0];

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, unbiased variance and moment skewness.
pub fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    let var = if xs.len() > 1 { m2 / (n - 1.0) } else { f64::NAN };
    let (m2, m3) = (m2 / n, m3 / n);
    let skew = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    (mean, var, skew)
}

/// Simulates `plan.replications` datasets and summarizes the ISRP estimates
/// of every interval. Only the point estimates are computed per replicate.
pub fn replicate_isrp(
    plan: &SimulationPlan,
    opts: &ProfileOptions,
    exec: Execution,
) -> Result<ReplicationSummary> {
    let sampler = Sampler::new(plan)?;
    let grid = plan.grid;
    let w = window_len(opts.parent, opts.target);
    if grid.q < w {
        return Err(Error::WindowTooLarge { window: w, len: grid.q });
    }
    let intervals = grid.q + 1 - w;
    let mean = sampler.mean().to_vec();
    let (x0_true, t_base) = baseline_of(opts.baseline, &mean, grid.t0);

    let runs = map_indexed(exec, plan.replications, |i| -> Result<(Vec<Option<f64>>, usize)> {
        let data = sampler.draw(i)?;
        let means = data.column_means();
        let (x0bar, _) = baseline_of(opts.baseline, &means, grid.t0);
        let est = (0..intervals)
            .map(|j0| {
                estimate_with_gradient(opts, &means, j0, grid.h, grid.time(j0) - t_base, x0bar)
                    .ok()
                    .map(|(v, _)| v)
            })
            .collect();
        Ok((est, data.nonpositive_count()))
    });
    let mut samples = Vec::with_capacity(plan.replications);
    let mut nonpositive = 0;
    for run in runs {
        let (est, np) = run?;
        samples.push(est);
        nonpositive += np;
    }

    let sigma = koopman_matrix(&plan.cov, w)?;
    let summaries = (0..intervals)
        .map(|j0| {
            let mut xs: Vec<f64> = samples.iter().filter_map(|s| s[j0]).collect();
            let (m, v, sk) = moments(&xs);
            xs.sort_by(f64::total_cmp);
            let quantiles = QUANTILE_LEVELS.map(|p| quantile_sorted(&xs, p));
            let delta = estimate_with_gradient(opts, &mean, j0, grid.h, grid.time(j0) - t_base, x0_true)
                .and_then(|(_, g)| delta_variance(&g, &sigma, plan.n))
                .ok();
            IntervalSummary {
                j: j0 + 1,
                t_j: grid.time(j0),
                successes: xs.len(),
                failures: plan.replications - xs.len(),
                mean: m,
                variance: v,
                skewness: sk,
                quantiles,
                delta_variance: delta,
            }
        })
        .collect();
    Ok(ReplicationSummary {
        replications: plan.replications,
        intervals: summaries,
        nonpositive_draws: nonpositive,
        samples,
    })
}
