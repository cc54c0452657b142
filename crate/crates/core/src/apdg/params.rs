use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ModelConstants;
use crate::Scalar;

/// Parameter regime: `A` needs both strong-convexity constants, `B` drops the
/// dual one in favour of `µ_xy`, `C` drops the primal one in favour of `µ_yx`,
/// `D` uses only the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    A,
    B,
    C,
    D,
}

impl Regime {
    /// Tie-break order for automatic selection.
    pub const ALL: [Regime; 4] = [Regime::A, Regime::B, Regime::C, Regime::D];

    pub fn is_feasible<T: Scalar>(self, c: &ModelConstants<T>) -> bool {
        let z = T::zero();
        match self {
            Regime::A => c.mu_x > z && c.mu_y > z,
            Regime::B => c.mu_x > z && c.mu_xy > z,
            Regime::C => c.mu_y > z && c.mu_yx > z,
            Regime::D => c.mu_xy > z && c.mu_yx > z,
        }
    }

    /// Strong-convexity constants the regime actually uses; the ones it
    /// replaces by a coupling constant are treated as zero.
    pub fn effective_mu<T: Scalar>(self, c: &ModelConstants<T>) -> (T, T) {
        match self {
            Regime::A => (c.mu_x, c.mu_y),
            Regime::B => (c.mu_x, T::zero()),
            Regime::C => (T::zero(), c.mu_y),
            Regime::D => (T::zero(), T::zero()),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::A => "A",
            Regime::B => "B",
            Regime::C => "C",
            Regime::D => "D",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RegimeChoice {
    #[default]
    Auto,
    Fixed(Regime),
}

impl FromStr for RegimeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(RegimeChoice::Auto),
            "a" => Ok(RegimeChoice::Fixed(Regime::A)),
            "b" => Ok(RegimeChoice::Fixed(Regime::B)),
            "c" => Ok(RegimeChoice::Fixed(Regime::C)),
            "d" => Ok(RegimeChoice::Fixed(Regime::D)),
            other => Err(Error::InvalidArgument(format!(
                "unknown regime {other:?} (expected auto, a, b, c or d)"
            ))),
        }
    }
}

impl TryFrom<String> for RegimeChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RegimeChoice> for String {
    fn from(r: RegimeChoice) -> Self {
        r.to_string()
    }
}

impl fmt::Display for RegimeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeChoice::Auto => f.write_str("auto"),
            RegimeChoice::Fixed(r) => write!(f, "{}", r.to_string().to_ascii_lowercase()),
        }
    }
}

impl From<Regime> for RegimeChoice {
    fn from(r: Regime) -> Self {
        RegimeChoice::Fixed(r)
    }
}

/// Step sizes, momenta and the contraction factor of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApdgParameters<T> {
    pub eta_x: T,
    pub eta_y: T,
    pub alpha_x: T,
    pub alpha_y: T,
    pub beta_x: T,
    pub beta_y: T,
    pub tau_x: T,
    pub tau_y: T,
    pub sigma_x: T,
    pub sigma_y: T,
    pub theta: T,
    pub omega: T,
    pub rho: T,
    pub regime: Regime,
}

fn validate<T: Scalar>(c: &ModelConstants<T>) -> Result<()> {
    let all = [c.mu_x, c.l_x, c.mu_y, c.l_y, c.l_xy, c.mu_xy, c.mu_yx];
    if !all.iter().all(|v| v.is_finite_value()) {
        return Err(Error::NonFinite("model constants"));
    }
    if all.iter().any(|&v| v < T::zero()) {
        return Err(Error::InvalidArgument(
            "model constants must be non-negative".into(),
        ));
    }
    if c.l_x <= T::zero() || c.l_y <= T::zero() || c.l_xy <= T::zero() {
        return Err(Error::InvalidArgument(
            "smoothness constants L_x, L_y and L_xy must be positive".into(),
        ));
    }
    if c.mu_x > c.l_x || c.mu_y > c.l_y || c.mu_xy > c.l_xy || c.mu_yx > c.l_xy {
        return Err(Error::InvalidArgument(
            "each strong-convexity constant must not exceed its smoothness constant".into(),
        ));
    }
    Ok(())
}

fn max_of<T: Scalar>(terms: &[T]) -> T {
    terms.iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// `(ω, σ_x, σ_y)` for a regime.
fn coupling_weights<T: Scalar>(regime: Regime, c: &ModelConstants<T>) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let sx_strong = || (c.mu_x / (two * c.l_x)).sqrt();
    let sy_strong = || (c.mu_y / (two * c.l_y)).sqrt();
    let sx_coupled = || one.min((c.mu_yx * c.mu_yx / (four * c.l_x * c.l_y)).sqrt());
    let sy_coupled = || one.min((c.mu_xy * c.mu_xy / (four * c.l_x * c.l_y)).sqrt());
    match regime {
        Regime::A => ((c.mu_y / c.mu_x).sqrt(), sx_strong(), sy_strong()),
        Regime::B => (
            (c.mu_xy * c.mu_xy / (two * c.mu_x * c.l_x)).sqrt(),
            sx_strong(),
            sy_coupled(),
        ),
        Regime::C => (
            (two * c.mu_y * c.l_y / (c.mu_yx * c.mu_yx)).sqrt(),
            sx_coupled(),
            sy_strong(),
        ),
        Regime::D => (
            c.mu_xy / c.mu_yx * (c.l_y / c.l_x).sqrt(),
            sx_coupled(),
            sy_coupled(),
        ),
    }
}

/// `1/ρ` for a regime given its weights, as the max of the regime's terms.
fn inverse_rho<T: Scalar>(regime: Regime, c: &ModelConstants<T>, w: (T, T, T)) -> T {
    let (omega, sx, sy) = w;
    let (mx, my) = regime.effective_mu(c);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let eight = T::lit(8.0);
    let lxy2 = c.l_xy * c.l_xy;
    let mxy2 = c.mu_xy * c.mu_xy;
    let myx2 = c.mu_yx * c.mu_yx;
    let px = mx + c.l_x * sx;
    let py = my + c.l_y * sy;
    match regime {
        Regime::A => max_of(&[
            four * px / c.mu_x,
            two / sx,
            four * py / c.mu_y,
            two / sy,
            four * c.l_xy / (c.mu_x * omega),
            four * c.l_xy * omega / c.mu_y,
        ]),
        Regime::B => max_of(&[
            four * px / c.mu_x,
            two / sx,
            eight * c.l_x * py / mxy2,
            two / sy,
            two * lxy2 / mxy2,
            eight * c.l_x * c.l_xy * omega / mxy2,
            four * c.l_xy / (c.mu_x * omega),
        ]),
        Regime::C => max_of(&[
            four * py / c.mu_y,
            two / sy,
            eight * c.l_y * px / myx2,
            two / sx,
            two * lxy2 / myx2,
            eight * c.l_y * c.l_xy / (myx2 * omega),
            four * c.l_xy * omega / c.mu_y,
        ]),
        Regime::D => max_of(&[
            eight * c.l_y * px / myx2,
            two / sx,
            eight * c.l_x * py / mxy2,
            two / sy,
            eight * c.l_y * c.l_xy / (myx2 * omega),
            eight * c.l_x * c.l_xy * omega / mxy2,
            two * lxy2 / myx2,
            two * lxy2 / mxy2,
        ]),
    }
}

fn parameters_for<T: Scalar>(regime: Regime, c: &ModelConstants<T>) -> ApdgParameters<T> {
    let one = T::one();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let w = coupling_weights(regime, c);
    let (omega, sigma_x, sigma_y) = w;
    let (mx, my) = regime.effective_mu(c);
    let rho = one / inverse_rho(regime, c, w);
    let eta_x = (one / (four * (mx + c.l_x * sigma_x))).min(omega / (four * c.l_xy));
    let eta_y = (one / (four * (my + c.l_y * sigma_y))).min(one / (four * c.l_xy * omega));
    let lxy2 = c.l_xy * c.l_xy;
    ApdgParameters {
        eta_x,
        eta_y,
        alpha_x: mx,
        alpha_y: my,
        beta_x: (one / (two * c.l_y)).min(one / (two * eta_x * lxy2)),
        beta_y: (one / (two * c.l_x)).min(one / (two * eta_y * lxy2)),
        tau_x: one / (one / sigma_x + half),
        tau_y: one / (one / sigma_y + half),
        sigma_x,
        sigma_y,
        theta: one - rho,
        omega,
        rho,
        regime,
    }
}

/// Parameters for a fixed regime, or the feasible regime with the largest `ρ`.
pub fn select_parameters<T: Scalar>(
    constants: &ModelConstants<T>,
    choice: RegimeChoice,
) -> Result<ApdgParameters<T>> {
    validate(constants)?;
    match choice {
        RegimeChoice::Fixed(r) => {
            if !r.is_feasible(constants) {
                return Err(Error::Infeasible(format!(
                    "regime {r} needs {}",
                    match r {
                        Regime::A => "mu_x > 0 and mu_y > 0",
                        Regime::B => "mu_x > 0 and mu_xy > 0",
                        Regime::C => "mu_y > 0 and mu_yx > 0",
                        Regime::D => "mu_xy > 0 and mu_yx > 0",
                    }
                )));
            }
            Ok(parameters_for(r, constants))
        }
        RegimeChoice::Auto => {
            let mut best: Option<ApdgParameters<T>> = None;
            for r in Regime::ALL {
                if !r.is_feasible(constants) {
                    continue;
                }
                let p = parameters_for(r, constants);
                if best.is_none_or(|b| p.rho > b.rho) {
                    best = Some(p);
                }
            }
            best.ok_or_else(|| {
                Error::Infeasible("every regime needs a positive strong-convexity constant".into())
            })
        }
    }
}

impl<T: Scalar> ApdgParameters<T> {
    /// `ν = max{ω/(3L_xy), 1/(4L_xy ω)}`.
    pub fn nu(&self, l_xy: T) -> T {
        (self.omega / (T::lit(3.0) * l_xy)).max(T::one() / (T::lit(4.0) * l_xy * self.omega))
    }

    /// Checks the defining identities against `constants`; returns the
    /// largest relative deviation found.
    pub fn invariant_deviation(&self, constants: &ModelConstants<T>) -> T {
        let expected = parameters_for(self.regime, constants);
        let pairs = [
            (self.eta_x, expected.eta_x),
            (self.eta_y, expected.eta_y),
            (self.alpha_x, expected.alpha_x),
            (self.alpha_y, expected.alpha_y),
            (self.beta_x, expected.beta_x),
            (self.beta_y, expected.beta_y),
            (
                self.tau_x,
                T::one() / (T::one() / self.sigma_x + T::lit(0.5)),
            ),
            (
                self.tau_y,
                T::one() / (T::one() / self.sigma_y + T::lit(0.5)),
            ),
            (self.theta, T::one() - expected.rho),
        ];
        pairs.iter().fold(T::zero(), |acc, &(a, b)| {
            let d = (a - b).abs();
            acc.max(if b == T::zero() { d } else { d / b.abs() })
        })
    }
}
