//! Fidelity training cost, analytic gradients, Monte-Carlo test error and
//! the optimisation loop.

use num_complex::Complex64;
use rand::Rng;

use crate::ansatz::{
    apply_circuit, apply_element, apply_element_dagger, AnsatzCircuit, LayerElement,
    ParameterVector, RotationAxis,
};
use crate::ensembles::{sample_state, EnsembleSpec, TrainingSet};
use crate::sim::raw_inner_product;
use crate::{Error, Result};

/// Optimizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Full-memory BFGS with backtracking line search (default).
    Bfgs,
    Adam,
    /// Plain gradient descent with backtracking line search.
    Gd,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bfgs" => Ok(OptimizerKind::Bfgs),
            "adam" => Ok(OptimizerKind::Adam),
            "gd" => Ok(OptimizerKind::Gd),
            other => Err(Error::InvalidArgument(format!("unknown optimizer '{other}'"))),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Bfgs => "bfgs",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Gd => "gd",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    /// Adam step size; BFGS/GD use backtracking from unit step.
    pub learning_rate: f64,
    pub max_steps: usize,
    /// `steps_e` records the first step with `C_train` below this; it is
    /// also the stopping cost unless `stop_threshold` is set.
    pub convergence_threshold: f64,
    /// Optional deeper stopping cost: keep minimizing past the crossing
    /// (towards the actual minimum) until `C_train` falls below this.
    pub stop_threshold: Option<f64>,
    /// Local-minimum stop on the gradient norm.
    pub gradient_threshold: f64,
    /// Monte-Carlo test states for the final test error.
    pub n_test: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Bfgs,
            learning_rate: 0.01,
            max_steps: 2000,
            convergence_threshold: 1e-4,
            stop_threshold: None,
            gradient_threshold: 1e-10,
            n_test: 100,
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStatus {
    /// `C_train` fell below the convergence threshold.
    Converged,
    /// Gradient vanished (or the line search flattened out) above threshold.
    LocalMinimum,
    StepLimit,
}

impl std::fmt::Display for TrainStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrainStatus::Converged => "converged",
            TrainStatus::LocalMinimum => "local-minimum",
            TrainStatus::StepLimit => "step-limit",
        })
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct CostEstimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub theta_star: ParameterVector,
    pub c_train_final: f64,
    pub c_test_final: f64,
    pub c_test_std_error: f64,
    /// First step with `C_train` below threshold, or `max_steps` if never.
    pub steps_e: usize,
    pub converged: bool,
    pub status: TrainStatus,
    pub cost_history: Vec<(usize, f64)>,
    /// `C_test − C_train` at the final parameters.
    pub empirical_risk: f64,
}

fn check_set(ansatz: &AnsatzCircuit, s: &TrainingSet) -> Result<()> {
    if s.is_empty() {
        return Err(Error::EmptyInput("empty training set"));
    }
    for state in s.inputs.iter().chain(&s.targets) {
        if state.n_qubits() != ansatz.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: state.n_qubits(),
                right: ansatz.n_qubits(),
            });
        }
    }
    Ok(())
}

/// `C_train = 1 − L⁻¹ Σ_ℓ |⟨target_ℓ|U(θ)|input_ℓ⟩|²`.
pub fn cost_train(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    s: &TrainingSet,
) -> Result<f64> {
    check_set(ansatz, s)?;
    let mut fid = 0.0;
    for (input, target) in s.inputs.iter().zip(&s.targets) {
        let out = apply_circuit(ansatz, theta, input)?;
        fid += raw_inner_product(target.amplitudes(), out.amplitudes()).norm_sqr();
    }
    // Fidelity can overshoot 1 by rounding; the cost contract is [0, 1].
    Ok((1.0 - fid / s.len() as f64).max(0.0))
}

/// `⟨bra|(-iH)|ket⟩` for a bare Pauli generator, without scratch buffers.
fn generator_overlap(
    bra: &[Complex64],
    ket: &[Complex64],
    axis: RotationAxis,
    qubit: usize,
) -> Complex64 {
    let mask = 1usize << qubit;
    match axis {
        RotationAxis::Z => {
            let mut acc0 = Complex64::new(0.0, 0.0);
            let mut acc1 = Complex64::new(0.0, 0.0);
            for i in 0..ket.len() {
                if i & mask == 0 {
                    acc0 += bra[i].conj() * ket[i];
                } else {
                    acc1 += bra[i].conj() * ket[i];
                }
            }
            Complex64::new(0.0, 1.0) * (acc1 - acc0)
        }
        RotationAxis::Y => {
            // -iσ_y maps (a0, a1) to (-a1, a0).
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..ket.len() {
                if i & mask == 0 {
                    let j = i | mask;
                    acc += bra[i].conj() * (-ket[j]) + bra[j].conj() * ket[i];
                }
            }
            acc
        }
    }
}

/// Training cost and its full analytic gradient in one forward and one
/// backward sweep per training pair.
pub fn cost_and_grad(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    s: &TrainingSet,
) -> Result<(f64, Vec<f64>)> {
    check_set(ansatz, s)?;
    if theta.len() != ansatz.total_params() {
        return Err(Error::ParameterLength {
            got: theta.len(),
            expected: ansatz.total_params(),
        });
    }
    let n = ansatz.n_qubits();
    let l = s.len() as f64;
    let mut fid = 0.0;
    let mut grad = vec![0.0; ansatz.total_params()];
    for (input, target) in s.inputs.iter().zip(&s.targets) {
        let mut ket = input.amplitudes().to_vec();
        for el in ansatz.elements() {
            apply_element(&mut ket, n, el, theta.values())?;
        }
        let f = raw_inner_product(target.amplitudes(), &ket);
        fid += f.norm_sqr();

        // Backward sweep: before handling element k (last first) the
        // invariants are ket = U_{1→k}|in⟩ and bra = U_{k+1→M}†|t⟩, so
        // ⟨t|∂_k U|in⟩ = ⟨bra|(-iH_k)|ket⟩.
        let mut bra = target.amplitudes().to_vec();
        for el in ansatz.elements().iter().rev() {
            if let LayerElement::Rotation { axis, qubit, param } = el {
                let y = generator_overlap(&bra, &ket, *axis, *qubit);
                grad[*param] += -(2.0 / l) * (f.conj() * y).re;
            }
            apply_element_dagger(&mut ket, n, el, theta.values())?;
            apply_element_dagger(&mut bra, n, el, theta.values())?;
        }
    }
    Ok(((1.0 - fid / l).max(0.0), grad))
}

/// `∇C_train` alone.
pub fn grad_cost_train(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    s: &TrainingSet,
) -> Result<Vec<f64>> {
    cost_and_grad(ansatz, theta, s).map(|(_, g)| g)
}

/// Monte-Carlo test error `1 − E_ψ |⟨ψ|V†U(θ)|ψ⟩|²` over fresh states from
/// `spec`, with `V` given by `(target, theta_g)`.
pub fn cost_test<R: Rng + ?Sized>(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    target: &AnsatzCircuit,
    theta_g: &ParameterVector,
    spec: &EnsembleSpec,
    n_test: usize,
    rng: &mut R,
) -> Result<CostEstimate> {
    if n_test == 0 {
        return Err(Error::EmptyInput("zero test states"));
    }
    let mut errors = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let psi = sample_state(spec, rng)?;
        let reference = apply_circuit(target, theta_g, &psi)?;
        let out = apply_circuit(ansatz, theta, &psi)?;
        let f = raw_inner_product(reference.amplitudes(), out.amplitudes()).norm_sqr();
        errors.push(1.0 - f);
    }
    let mean = (errors.iter().sum::<f64>() / n_test as f64).max(0.0);
    let var = if n_test > 1 {
        errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n_test as f64 - 1.0)
    } else {
        0.0
    };
    Ok(CostEstimate {
        value: mean,
        std_error: (var / n_test as f64).sqrt(),
    })
}

/// Test error without training: the mean of [`cost_test`] over `n_draws`
/// uniformly random parameter vectors. Normalizing trained test errors by
/// this baseline gives the scale-free generalization curve.
pub fn baseline_test_error<R: Rng + ?Sized>(
    ansatz: &AnsatzCircuit,
    target: &AnsatzCircuit,
    theta_g: &ParameterVector,
    spec: &EnsembleSpec,
    n_draws: usize,
    n_test: usize,
    rng: &mut R,
) -> Result<CostEstimate> {
    if n_draws == 0 {
        return Err(Error::EmptyInput("zero baseline draws"));
    }
    let mut values = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let theta = ParameterVector::random_uniform(ansatz.total_params(), rng);
        values.push(cost_test(ansatz, &theta, target, theta_g, spec, n_test, rng)?.value);
    }
    let mean = values.iter().sum::<f64>() / n_draws as f64;
    let var = if n_draws > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_draws as f64 - 1.0)
    } else {
        0.0
    };
    Ok(CostEstimate {
        value: mean,
        std_error: (var / n_draws as f64).sqrt(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct InverseHessian {
    m: usize,
    data: Vec<f64>,
}

impl InverseHessian {
    fn identity(m: usize) -> Self {
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + i] = 1.0;
        }
        Self { m, data }
    }

    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for i in 0..self.m {
            let row = &self.data[i * self.m..(i + 1) * self.m];
            out[i] = dot(row, v);
        }
        out
    }

    /// BFGS inverse update with curvature `sy = s·y > 0`.
    fn update(&mut self, s: &[f64], y: &[f64], sy: f64) {
        let rho = 1.0 / sy;
        let hy = self.matvec(y);
        let yhy = dot(y, &hy);
        let coef = rho * rho * yhy + rho;
        for i in 0..self.m {
            for j in 0..self.m {
                self.data[i * self.m + j] +=
                    -rho * (s[i] * hy[j] + hy[i] * s[j]) + coef * s[i] * s[j];
            }
        }
    }
}

enum LineSearch {
    Accepted { alpha: f64 },
    Failed,
}

fn backtrack(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    s: &TrainingSet,
    dir: &[f64],
    c0: f64,
    g_dot_dir: f64,
) -> Result<LineSearch> {
    let mut alpha = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = theta
            .values()
            .iter()
            .zip(dir)
            .map(|(t, d)| t + alpha * d)
            .collect();
        let c = cost_train(ansatz, &ParameterVector::new(trial), s)?;
        if c.is_finite() && c <= c0 + 1e-4 * alpha * g_dot_dir {
            return Ok(LineSearch::Accepted { alpha });
        }
        alpha *= 0.5;
    }
    Ok(LineSearch::Failed)
}

/// Minimizes `C_train` from `theta0`, then evaluates the test error at the
/// final parameters. A run ends on convergence (`C_train` below threshold),
/// a vanishing gradient or failing line search (local minimum), or the step
/// limit.
#[allow(clippy::too_many_arguments)]
pub fn train<R: Rng + ?Sized>(
    ansatz: &AnsatzCircuit,
    theta0: &ParameterVector,
    s: &TrainingSet,
    target: &AnsatzCircuit,
    theta_g: &ParameterVector,
    test_spec: &EnsembleSpec,
    config: &TrainConfig,
    test_rng: &mut R,
) -> Result<TrainResult> {
    if theta0.len() != ansatz.total_params() {
        return Err(Error::ParameterLength {
            got: theta0.len(),
            expected: ansatz.total_params(),
        });
    }
    let m = ansatz.total_params();
    let mut theta = theta0.clone();
    let (mut c, mut g) = cost_and_grad(ansatz, &theta, s)?;
    if !c.is_finite() {
        return Err(Error::NonFiniteCost { what: "cost", step: 0 });
    }
    let stop_cost = config
        .stop_threshold
        .unwrap_or(config.convergence_threshold);
    let mut history = vec![(0usize, c)];
    let mut crossing: Option<usize> = if c < config.convergence_threshold {
        Some(0)
    } else {
        None
    };
    let mut status = TrainStatus::StepLimit;

    if c < stop_cost {
        status = TrainStatus::Converged;
    } else {
        let mut hess = InverseHessian::identity(m);
        let mut adam_m = vec![0.0; m];
        let mut adam_v = vec![0.0; m];
        for step in 1..=config.max_steps {
            if norm(&g) < config.gradient_threshold {
                status = TrainStatus::LocalMinimum;
                break;
            }
            let accepted = match config.optimizer {
                OptimizerKind::Bfgs | OptimizerKind::Gd => {
                    let mut dir = if config.optimizer == OptimizerKind::Bfgs {
                        let d = hess.matvec(&g);
                        d.iter().map(|x| -x).collect::<Vec<f64>>()
                    } else {
                        g.iter().map(|x| -x).collect::<Vec<f64>>()
                    };
                    let mut g_dot_dir = dot(&g, &dir);
                    if g_dot_dir >= 0.0 {
                        // Not a descent direction: restart from steepest.
                        hess = InverseHessian::identity(m);
                        dir = g.iter().map(|x| -x).collect();
                        g_dot_dir = dot(&g, &dir);
                    }
                    let mut found = backtrack(ansatz, &theta, s, &dir, c, g_dot_dir)?;
                    if matches!(found, LineSearch::Failed)
                        && config.optimizer == OptimizerKind::Bfgs
                    {
                        hess = InverseHessian::identity(m);
                        dir = g.iter().map(|x| -x).collect();
                        g_dot_dir = dot(&g, &dir);
                        found = backtrack(ansatz, &theta, s, &dir, c, g_dot_dir)?;
                    }
                    match found {
                        LineSearch::Failed => None,
                        LineSearch::Accepted { alpha } => {
                            let prev_theta = theta.clone();
                            for (t, d) in theta.values_mut().iter_mut().zip(&dir) {
                                *t += alpha * d;
                            }
                            let (c_new, g_new) = cost_and_grad(ansatz, &theta, s)?;
                            if config.optimizer == OptimizerKind::Bfgs {
                                let sdelta: Vec<f64> = theta
                                    .values()
                                    .iter()
                                    .zip(prev_theta.values())
                                    .map(|(a, b)| a - b)
                                    .collect();
                                let y: Vec<f64> =
                                    g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                                let sy = dot(&sdelta, &y);
                                if sy > 1e-12 * norm(&sdelta) * norm(&y) {
                                    hess.update(&sdelta, &y, sy);
                                }
                            }
                            Some((c_new, g_new))
                        }
                    }
                }
                OptimizerKind::Adam => {
                    let beta1 = 0.9;
                    let beta2 = 0.999;
                    let t = step as f64;
                    for i in 0..m {
                        adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * g[i];
                        adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * g[i] * g[i];
                        let mhat = adam_m[i] / (1.0 - beta1.powf(t));
                        let vhat = adam_v[i] / (1.0 - beta2.powf(t));
                        theta.values_mut()[i] -=
                            config.learning_rate * mhat / (vhat.sqrt() + 1e-8);
                    }
                    Some(cost_and_grad(ansatz, &theta, s)?)
                }
            };

            let Some((c_new, g_new)) = accepted else {
                status = TrainStatus::LocalMinimum;
                break;
            };
            if !c_new.is_finite() {
                return Err(Error::NonFiniteCost { what: "cost", step });
            }
            if g_new.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCost { what: "gradient", step });
            }
            c = c_new;
            g = g_new;
            history.push((step, c));
            if crossing.is_none() && c < config.convergence_threshold {
                crossing = Some(step);
            }
            if c < stop_cost {
                status = TrainStatus::Converged;
                break;
            }
        }
    }

    let test = cost_test(
        ansatz,
        &theta,
        target,
        theta_g,
        test_spec,
        config.n_test,
        test_rng,
    )?;
    // "Converged" means the global-minimum region was reached, i.e. the
    // final cost sits below the E-crossing threshold, whichever rule ended
    // the run.
    let converged = c < config.convergence_threshold;
    Ok(TrainResult {
        theta_star: theta,
        c_train_final: c,
        c_test_final: test.value,
        c_test_std_error: test.std_error,
        steps_e: crossing.unwrap_or(config.max_steps),
        converged,
        status,
        cost_history: history,
        empirical_risk: test.value - c,
    })
}
