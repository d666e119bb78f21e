//! Derivative-free minimisation of variational parameters.
//!
//! Nelder–Mead simplex descent (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5) with seeded restarts. The evaluation budget is shared by all
//! restarts, which run one after another; each restart after the first starts
//! from the best point found so far plus a uniform perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_hea, build_qaoa, HeaParams, QaoaParams};
use crate::error::{Error, Result};
use crate::geometry::TargetSpace;
use crate::sat::CnfFormula;
use crate::state::StateVector;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Total objective evaluations across all restarts.
    pub max_evals: usize,
    /// A restart stops once the simplex cost spread falls to this value.
    pub ftol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Half-width of the uniform draw for random starting points.
    pub init_scale: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Half-width of the uniform perturbation applied to the best point
    /// before each further restart.
    pub restart_jitter: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_evals: 5000,
            ftol: 1e-6,
            restarts: 3,
            seed: 0,
            init_scale: 0.1,
            initial_step: 0.5,
            restart_jitter: 0.6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::input("cannot optimise over zero parameters"));
        }
        if self.max_evals < dim + 2 {
            return Err(Error::input(format!(
                "max_evals = {} is below dimension + 2 = {}",
                self.max_evals,
                dim + 2
            )));
        }
        if self.restarts == 0 {
            return Err(Error::input("restarts must be at least 1"));
        }
        for (name, v) in [
            ("ftol", self.ftol),
            ("init_scale", self.init_scale),
            ("initial_step", self.initial_step),
            ("restart_jitter", self.restart_jitter),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::input(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.initial_step == 0.0 {
            return Err(Error::input("initial_step must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub evals_used: usize,
    pub restarts_run: usize,
    /// Restart indices abandoned after a non-finite objective value.
    pub aborted_restarts: Vec<usize>,
    /// Whether the last restart met the cost-spread tolerance.
    pub converged: bool,
}

enum EvalStop {
    Budget,
    NonFinite,
}

struct Budget<'a, F> {
    f: &'a F,
    used: usize,
    limit: usize,
}

impl<F: Fn(&[f64]) -> f64> Budget<'_, F> {
    fn eval(&mut self, x: &[f64]) -> std::result::Result<f64, EvalStop> {
        if self.used >= self.limit {
            return Err(EvalStop::Budget);
        }
        self.used += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalStop::NonFinite)
        }
    }
}

struct RestartOutcome {
    x: Vec<f64>,
    f: f64,
    converged: bool,
    aborted: bool,
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&a, &b)| a + t * (b - a)).collect()
}

/// One simplex descent. Returns the best vertex seen even if it stops early.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    budget: &mut Budget<'_, F>,
    start: &[f64],
    f_start: Option<f64>,
    cfg: &OptimizerConfig,
) -> RestartOutcome {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut best = RestartOutcome {
        x: start.to_vec(),
        f: f64::INFINITY,
        converged: false,
        aborted: false,
    };
    macro_rules! eval {
        ($x:expr) => {{
            let x: Vec<f64> = $x;
            match budget.eval(&x) {
                Ok(v) => {
                    if v < best.f {
                        best.f = v;
                        best.x = x.clone();
                    }
                    (x, v)
                }
                Err(EvalStop::Budget) => return best,
                Err(EvalStop::NonFinite) => {
                    best.aborted = true;
                    return best;
                }
            }
        }};
    }

    match f_start {
        Some(v) => {
            best.f = v;
            simplex.push((start.to_vec(), v));
        }
        None => simplex.push(eval!(start.to_vec())),
    }
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += cfg.initial_step;
        simplex.push(eval!(x));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_low = simplex[0].1;
        let f_high = simplex[dim].1;
        if f_high - f_low <= cfg.ftol {
            best.converged = true;
            return best;
        }
        let f_second = simplex[dim - 1].1;
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = simplex[dim].0.clone();

        let (xr, fr) = eval!(lerp(&centroid, &worst, -REFLECT));
        if fr < f_low {
            let (xe, fe) = eval!(lerp(&centroid, &xr, EXPAND));
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[dim] = (xr, fr);
            continue;
        }
        let accepted = if fr < f_high {
            let (xc, fc) = eval!(lerp(&centroid, &xr, CONTRACT));
            (fc <= fr).then_some((xc, fc))
        } else {
            let (xc, fc) = eval!(lerp(&centroid, &worst, CONTRACT));
            (fc < f_high).then_some((xc, fc))
        };
        match accepted {
            Some(v) => simplex[dim] = v,
            None => {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&anchor, &vertex.0, SHRINK);
                    *vertex = eval!(x);
                }
            }
        }
    }
}

/// Minimises `objective` from `x0`. The result never exceeds `f(x0)` and is
/// a pure function of the inputs.
pub fn minimize<F>(objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    cfg.validate(dim)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Optimize("starting point has non-finite entries".into()));
    }
    let mut budget = Budget {
        f: &objective,
        used: 0,
        limit: cfg.max_evals,
    };
    let f0 = match budget.eval(x0) {
        Ok(v) => v,
        Err(_) => return Err(Error::Optimize("objective is not finite at the starting point".into())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut result = MinimizeResult {
        x_best: x0.to_vec(),
        f_best: f0,
        evals_used: 0,
        restarts_run: 0,
        aborted_restarts: Vec::new(),
        converged: false,
    };

    for r in 0..cfg.restarts {
        let remaining = cfg.max_evals - budget.used;
        if r > 0 && remaining < dim + 1 {
            break;
        }
        let share = (remaining / (cfg.restarts - r)).max(dim + 2).min(remaining);
        let start_used = budget.used;
        budget.limit = start_used + share;
        let (start, f_start) = if r == 0 {
            (x0.to_vec(), Some(f0))
        } else {
            let jitter: Vec<f64> = result
                .x_best
                .iter()
                .map(|v| v + rng.random_range(-cfg.restart_jitter..=cfg.restart_jitter))
                .collect();
            (jitter, None)
        };
        let outcome = nelder_mead(&mut budget, &start, f_start, cfg);
        result.restarts_run += 1;
        if outcome.aborted {
            result.aborted_restarts.push(r);
        }
        if outcome.f < result.f_best {
            result.f_best = outcome.f;
            result.x_best = outcome.x;
        }
        result.converged = outcome.converged;
    }
    result.evals_used = budget.used;
    Ok(result)
}

/// `1 - <H_c>` of the hardware-efficient ansatz run on `|0...0>`.
pub fn vqe_cost(target: &TargetSpace, n: usize, p: usize) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    let zero = StateVector::zero(n);
    move |theta: &[f64]| {
        let Ok(zero) = zero.as_ref() else {
            return f64::NAN;
        };
        HeaParams::from_flat(n, p, theta)
            .and_then(|params| build_hea(n, p, &params))
            .and_then(|c| c.run(zero))
            .and_then(|psi| target.verifier_expectation(&psi))
            .map_or(f64::NAN, |hc| 1.0 - hc)
    }
}

/// `1 - <H_c>` of the QAOA circuit for `formula` with `p` layers, over the
/// flat `(gammas, betas)` vector.
pub fn qaoa_cost<'a>(
    formula: &'a CnfFormula,
    target: &'a TargetSpace,
    p: usize,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    let zero = StateVector::zero(formula.n());
    move |flat: &[f64]| {
        let Ok(zero) = zero.as_ref() else {
            return f64::NAN;
        };
        QaoaParams::from_flat(p, flat)
            .and_then(|params| build_qaoa(formula, &params))
            .and_then(|c| c.run(zero))
            .and_then(|psi| target.verifier_expectation(&psi))
            .map_or(f64::NAN, |hc| 1.0 - hc)
    }
}

/// Uniform draw in `[-scale, scale]` for every hardware-efficient angle.
pub fn hea_initial(n: usize, p: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * n * p)
        .map(|_| if scale > 0.0 { rng.random_range(-scale..=scale) } else { 0.0 })
        .collect()
}
