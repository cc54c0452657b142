use serde::Serialize;

use crate::apdg::{ceil_batch, ApdgParameters};
use crate::error::{check_dim, Error, Result};
use crate::linalg::replicate;
use crate::network::{consensus_rounds_needed, MixingSchedule};
use crate::problem::{
    consensus_model_delta, GroundTruth, ModelConstants, SaddlePointProblem, StochasticOracleSpec,
};
use crate::Scalar;

/// Everything planned before a decentralized run: the consensus
/// neighbourhood `δ′`, the model inexactness it buys, the worst-case
/// pre-consensus spread `D`, the rounds `T` that shrink `D` to `δ′`, and the
/// per-node batch sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InexactnessBudget<T> {
    pub delta_prime: T,
    pub delta_x: T,
    pub delta_y: T,
    #[serde(rename = "E")]
    pub e: T,
    pub nu: T,
    #[serde(rename = "D")]
    pub d: T,
    pub d_x1: T,
    pub d_x2: T,
    pub d_y1: T,
    pub d_y2: T,
    pub m_x: T,
    pub m_y: T,
    pub sigma2: T,
    pub sigma_fr2: T,
    pub sigma_gr2: T,
    pub f_x: T,
    pub f_y: T,
    pub grad_f_star_norm: T,
    pub grad_g_star_norm: T,
    pub psi0: T,
    /// Consensus rounds per iteration.
    pub rounds: usize,
    /// Planned iterations.
    pub iterations: usize,
    pub batch_f: Vec<usize>,
    pub batch_g: Vec<usize>,
    pub tau: usize,
    pub lambda: T,
    pub eps: T,
    /// Averaged constants as given.
    pub plain: ModelConstants<T>,
    /// Constants the parameters were selected with (`2L`, `µ/2`).
    pub hatted: ModelConstants<T>,
}

impl<T: Scalar> InexactnessBudget<T> {
    pub fn n(&self) -> usize {
        self.batch_f.len()
    }

    /// `(ω/(3L_xy))·(θᵏΨ⁰ + 4(δ_x+δ_y)/(1−θ)² + Σ²/(2(1−θ)))` and its y analogue.
    pub fn distance_bounds(&self, params: &ApdgParameters<T>, k: usize) -> (T, T) {
        let one = T::one();
        let gap = one - params.theta;
        let bracket = params.theta.powi(k as i32) * self.psi0
            + T::lit(4.0) * (self.delta_x + self.delta_y) / (gap * gap)
            + self.sigma2 / (T::lit(2.0) * gap);
        let l_xy = self.plain.l_xy;
        (
            params.omega / (T::lit(3.0) * l_xy) * bracket,
            one / (T::lit(4.0) * l_xy * params.omega) * bracket,
        )
    }

    /// Limit on the post-consensus error before a step is declared a budget
    /// violation.
    pub fn violation_limit(&self) -> T {
        T::lit(10.0) * self.delta_prime.sqrt()
    }
}

/// Plans a decentralized run at accuracy `eps`.
///
/// `params` must come from the hatted constants (see
/// [`ModelConstants::hatted`]); `psi0` is the Lyapunov value of the initial
/// average; `schedule` must carry a contraction certificate.
pub fn plan_budget<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    truth: &GroundTruth<T>,
    spec: &StochasticOracleSpec<T>,
    params: &ApdgParameters<T>,
    eps: T,
    schedule: &MixingSchedule<T>,
    psi0: T,
) -> Result<InexactnessBudget<T>> {
    let n = problem.n();
    check_dim("variance list", n, spec.n())?;
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if !psi0.is_finite_value() || psi0 < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "invalid initial Lyapunov value {psi0}"
        )));
    }
    let (tau, lambda) = schedule.contraction()?;
    let plain = problem.model_constants()?;
    if !(plain.mu_x > T::zero() && plain.mu_y > T::zero()) {
        return Err(Error::Infeasible(
            "decentralized planning needs mu_x > 0 and mu_y > 0".into(),
        ));
    }
    let hatted = plain.hatted();
    let local = problem.local_constants();
    let nn = T::count(n);
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let gap = one - params.theta;
    let l_xy = plain.l_xy;
    let omega = params.omega;

    let nu = params.nu(l_xy);
    let bracket = |ll: T, l: T, mu: T, mul: T| ll * ll / l + two * ll * ll / mu + ll - mul;
    let e = (bracket(local.l_lx, plain.l_x, plain.mu_x, local.mu_lx).max(bracket(
        local.l_ly,
        plain.l_y,
        plain.mu_y,
        local.mu_ly,
    ))) / (two * nn);
    let delta_prime = gap * gap * eps / (T::lit(24.0) * e * nu);
    if !(delta_prime > T::zero()) || !delta_prime.is_finite_value() {
        return Err(Error::Infeasible(format!(
            "consensus neighbourhood delta' = {delta_prime} is not positive"
        )));
    }
    let delta_x = consensus_model_delta(
        n,
        local.l_lx,
        local.mu_lx,
        plain.l_x,
        plain.mu_x,
        delta_prime,
    );
    let delta_y = consensus_model_delta(
        n,
        local.l_ly,
        local.mu_ly,
        plain.l_y,
        plain.mu_y,
        delta_prime,
    );

    let lead = nu / (two * nn * gap);
    let f_x = lead * (one / hatted.l_x + omega / l_xy);
    let f_y = lead * (one / hatted.l_y + one / (l_xy * omega));
    let six = T::lit(6.0);
    let batch_f: Vec<usize> = (0..n)
        .map(|i| ceil_batch(six * f_x * spec.node_sigma_f2(i) / eps))
        .collect();
    let batch_g: Vec<usize> = (0..n)
        .map(|i| ceil_batch(six * f_y * spec.node_sigma_g2(i) / eps))
        .collect();
    let sigma_fr2 = (0..n).fold(T::zero(), |s, i| {
        s + spec.node_sigma_f2(i) / T::count(batch_f[i])
    }) / nn;
    let sigma_gr2 = (0..n).fold(T::zero(), |s, i| {
        s + spec.node_sigma_g2(i) / T::count(batch_g[i])
    }) / nn;
    let sigma2 = (half / plain.l_x + omega / l_xy) * sigma_fr2 / nn
        + (half / plain.l_y + one / (l_xy * omega)) * sigma_gr2 / nn;

    let floor = psi0 + T::lit(4.0) * (delta_x + delta_y) / (gap * gap) + sigma2 / (two * gap);
    let m_x = (omega / (T::lit(3.0) * l_xy) * floor).sqrt();
    let m_y = (one / (T::lit(4.0) * l_xy * omega) * floor).sqrt();

    let x_star = replicate(&truth.x_star, n);
    let y_star = replicate(&truth.y_star, n);
    let grad_f_star_norm = problem.stacked_gradient_f(&x_star)?.norm();
    let grad_g_star_norm = problem.stacked_gradient_g(&y_star)?.norm();
    let sqrt_n = nn.sqrt();
    let f_term = (nn * sigma_fr2).sqrt() + plain.l_x * sqrt_n * m_x + grad_f_star_norm;
    let g_term = (nn * sigma_gr2).sqrt() + plain.l_y * sqrt_n * m_y + grad_g_star_norm;
    let three_halves = T::lit(1.5);
    let d_x1 = three_halves
        + l_xy / (two * plain.mu_x) * (one + two * params.theta)
        + local.l_ly / (two * l_xy)
        + local.l_lx / (two * plain.mu_x);
    let d_x2 = g_term / (two * l_xy) + f_term / (two * plain.mu_x);
    let d_y1 = three_halves
        + l_xy / (two * plain.mu_y) * d_x1
        + local.l_lx / (two * l_xy)
        + local.l_ly / (two * plain.mu_y);
    let d_y2 =
        l_xy / (two * plain.mu_y) * d_x2 + f_term / (two * l_xy) + g_term / (two * plain.mu_y);
    let root = delta_prime.sqrt();
    let d = (d_x1 * root + d_x2).max(d_y1 * root + d_y2);

    let rounds = consensus_rounds_needed(d, delta_prime, tau, lambda)?;
    let iterations = planned_iterations(params.theta, psi0, nu, eps);
    Ok(InexactnessBudget {
        delta_prime,
        delta_x,
        delta_y,
        e,
        nu,
        d,
        d_x1,
        d_x2,
        d_y1,
        d_y2,
        m_x,
        m_y,
        sigma2,
        sigma_fr2,
        sigma_gr2,
        f_x,
        f_y,
        grad_f_star_norm,
        grad_g_star_norm,
        psi0,
        rounds,
        iterations,
        batch_f,
        batch_g,
        tau,
        lambda,
        eps,
        plain,
        hatted,
    })
}

/// `⌈ln(3Ψ⁰ν/ε)/(1−θ)⌉`, at least 0.
pub fn planned_iterations<T: Scalar>(theta: T, psi0: T, nu: T, eps: T) -> usize {
    if !(psi0 > T::zero()) {
        return 0;
    }
    let v = ((T::lit(3.0) * psi0 * nu / eps).ln() / (T::one() - theta))
        .as_f64()
        .ceil();
    if v <= 0.0 || v.is_nan() {
        0
    } else {
        v as usize
    }
}
