//! Perturbation distributions for the soft occlusion test.
//!
//! A face `t` occludes pixel `p` with probability `F(d(p, t) / τ)`, where
//! `d` is the signed distance (positive inside) and `F` is the CDF of the
//! perturbation. Every family here is described by its CDF `F`, its density
//! `f = F'`, and an accurate survival function `1 - F` used to build the
//! reversed variant `F_rev(x) = 1 - F(-x)` without cancellation.
//!
//! Two transforms compose with any family:
//!
//! * `squares`: `F_sq(x) = F(|x| * x)`, the CDF of the signed square root of
//!   the perturbation;
//! * `reversed`: `F_rev(x) = 1 - F(-x)`, mirroring an asymmetric
//!   distribution. For symmetric families this is the identity.
//!
//! The two transforms commute, so `gamma(p=0.5,rev,sq)` is unambiguous.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spec_text::{tokenize, SpecOption};
use crate::special::{erf, erfc, ln_gamma, regularized_lower_gamma, regularized_upper_gamma};

/// `1 / sqrt(2 pi)`.
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Heaviside,
    Uniform,
    CubicHermite,
    WignerSemicircle,
    Gaussian,
    Laplace,
    Logistic,
    HyperbolicSecant,
    Cauchy,
    Reciprocal,
    GumbelMax,
    GumbelMin,
    Exponential,
    Levy,
    Gamma,
}

/// Coarse grouping by tail behaviour; these are the column blocks of the
/// benchmark heatmaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailClass {
    /// Dirac delta; not differentiable.
    Exact,
    /// Uniform, cubic Hermite, Wigner semicircle.
    FiniteSupport,
    /// Gaussian, Laplace, logistic, hyperbolic secant.
    ExponentialDecay,
    /// Cauchy and the reciprocal sigmoid.
    LinearDecay,
    /// Gumbel-Max / Gumbel-Min.
    TwoSidedAsymmetric,
    /// Exponential and Gamma.
    OneSided,
    /// Levy (slowest convergence).
    Levy,
}

impl Family {
    pub const ALL: [Family; 15] = [
        Family::Heaviside,
        Family::Uniform,
        Family::CubicHermite,
        Family::WignerSemicircle,
        Family::Gaussian,
        Family::Laplace,
        Family::Logistic,
        Family::HyperbolicSecant,
        Family::Cauchy,
        Family::Reciprocal,
        Family::GumbelMax,
        Family::GumbelMin,
        Family::Exponential,
        Family::Levy,
        Family::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Heaviside => "heaviside",
            Family::Uniform => "uniform",
            Family::CubicHermite => "cubic-hermite",
            Family::WignerSemicircle => "wigner-semicircle",
            Family::Gaussian => "gaussian",
            Family::Laplace => "laplace",
            Family::Logistic => "logistic",
            Family::HyperbolicSecant => "hyperbolic-secant",
            Family::Cauchy => "cauchy",
            Family::Reciprocal => "reciprocal",
            Family::GumbelMax => "gumbel-max",
            Family::GumbelMin => "gumbel-min",
            Family::Exponential => "exponential",
            Family::Levy => "levy",
            Family::Gamma => "gamma",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        let name = name.to_ascii_lowercase().replace('_', "-");
        let alias = match name.as_str() {
            "gudermannian" | "hypsec" => "hyperbolic-secant",
            "wigner" => "wigner-semicircle",
            "hermite" => "cubic-hermite",
            "normal" => "gaussian",
            other => other,
        };
        Family::ALL.into_iter().find(|f| f.name() == alias)
    }

    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            Family::Uniform
                | Family::CubicHermite
                | Family::WignerSemicircle
                | Family::Gaussian
                | Family::Laplace
                | Family::Logistic
                | Family::HyperbolicSecant
                | Family::Cauchy
                | Family::Reciprocal
        )
    }

    pub fn tail_class(self) -> TailClass {
        match self {
            Family::Heaviside => TailClass::Exact,
            Family::Uniform | Family::CubicHermite | Family::WignerSemicircle => {
                TailClass::FiniteSupport
            }
            Family::Gaussian | Family::Laplace | Family::Logistic | Family::HyperbolicSecant => {
                TailClass::ExponentialDecay
            }
            Family::Cauchy | Family::Reciprocal => TailClass::LinearDecay,
            Family::GumbelMax | Family::GumbelMin => TailClass::TwoSidedAsymmetric,
            Family::Exponential | Family::Gamma => TailClass::OneSided,
            Family::Levy => TailClass::Levy,
        }
    }

    /// Support is bounded on the left (CDF exactly 0 below some point).
    pub fn has_finite_left_support(self) -> bool {
        matches!(
            self.tail_class(),
            TailClass::Exact | TailClass::FiniteSupport | TailClass::OneSided | TailClass::Levy
        )
    }

    /// Support is bounded on the right (CDF exactly 1 above some point).
    pub fn has_finite_right_support(self) -> bool {
        matches!(
            self.tail_class(),
            TailClass::Exact | TailClass::FiniteSupport
        )
    }

    /// Points where the density jumps or has an unbounded slope. Central
    /// finite differences are unreliable in a neighbourhood of these.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            Family::Heaviside | Family::Exponential | Family::Gamma => &[0.0],
            Family::Uniform | Family::CubicHermite | Family::WignerSemicircle => &[-1.0, 1.0],
            _ => &[],
        }
    }
}

/// A concrete perturbation distribution: family, transforms, parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    squares: bool,
    reversed: bool,
    shape: Option<f64>,
    shift: f64,
}

impl DistributionSpec {
    /// A parameter-free family. Gamma needs [`DistributionSpec::gamma`].
    pub fn new(family: Family) -> Result<Self> {
        if family == Family::Gamma {
            return Err(Error::config("gamma needs a shape parameter p > 0"));
        }
        Ok(Self {
            family,
            squares: false,
            reversed: false,
            shape: None,
            shift: 0.0,
        })
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::config(format!(
                "gamma shape must be > 0, got {shape}"
            )));
        }
        Ok(Self {
            family: Family::Gamma,
            squares: false,
            reversed: false,
            shape: Some(shape),
            shift: 0.0,
        })
    }

    /// Convenience for families known not to need parameters.
    pub fn of(family: Family) -> Self {
        Self::new(family).expect("family needs parameters")
    }

    pub fn with_squares(mut self, on: bool) -> Self {
        self.squares = on;
        self
    }

    /// Reversal is dropped for symmetric families, where it is the identity.
    pub fn with_reversed(mut self, on: bool) -> Self {
        self.reversed = on && !self.family.is_symmetric();
        self
    }

    /// Shifts the base argument: the base CDF is evaluated at `y - shift`.
    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn squares(&self) -> bool {
        self.squares
    }
    pub fn reversed(&self) -> bool {
        self.reversed
    }
    pub fn shape(&self) -> Option<f64> {
        self.shape
    }
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_differentiable(&self) -> bool {
        self.family != Family::Heaviside
    }

    /// The same spec without the squares transform.
    pub fn without_squares(&self) -> Self {
        Self {
            squares: false,
            ..*self
        }
    }

    /// Maps a signed distance `d` (already in normalized units) and the
    /// temperature to the argument `x` of [`cdf`], returning `(x, dx/dd)`.
    ///
    /// For the squares variant `x = d / sqrt(τ)`, so that
    /// `cdf(x) = F(|d| d / τ)`.
    pub fn scaled_argument(&self, d: f64, tau: f64) -> (f64, f64) {
        if self.squares {
            let k = 1.0 / tau.sqrt();
            (d * k, k)
        } else {
            let k = 1.0 / tau;
            (d * k, k)
        }
    }

    /// Base argument after squares / reversal / shift, and whether the
    /// reversed (survival) branch is used.
    #[inline]
    fn base_argument(&self, x: f64) -> f64 {
        let y = if self.squares { x.abs() * x } else { x };
        if self.reversed {
            -y - self.shift
        } else {
            y - self.shift
        }
    }

    /// Piecewise-regime code of `x` for kink detection. Points within
    /// `guard` (in `x` units) of a kink of the base CDF get a dedicated code.
    pub fn regime(&self, x: f64, guard: f64) -> u8 {
        let kinks = self.family.kinks();
        if kinks.is_empty() {
            return 0;
        }
        let y = self.base_argument(x);
        let slope = if self.squares {
            2.0 * x.abs() + guard
        } else {
            1.0
        };
        let g = guard * slope;
        let mut code = 0u8;
        for &k in kinks {
            if (y - k).abs() < g {
                return 255;
            }
            if y >= k {
                code += 1;
            }
        }
        code
    }
}

impl Default for DistributionSpec {
    fn default() -> Self {
        Self::of(Family::Logistic)
    }
}

/// CDF `F(x)` of the spec, squares and reversal applied.
pub fn cdf(spec: &DistributionSpec, x: f64) -> f64 {
    let y = spec.base_argument(x);
    let v = if spec.reversed {
        base_sf(spec.family, spec.shape, y)
    } else {
        base_cdf(spec.family, spec.shape, y)
    };
    v.clamp(0.0, 1.0)
}

/// Density `f(x) = dF/dx` of the spec. At kinks the value of the piece
/// containing `x` is returned (right-continuous for one-sided families,
/// closed interval for finite support).
pub fn pdf(spec: &DistributionSpec, x: f64) -> f64 {
    let y = spec.base_argument(x);
    let dy = if spec.squares { 2.0 * x.abs() } else { 1.0 };
    base_pdf(spec.family, spec.shape, y) * dy
}

/// Survival function `1 - F(x)` of the spec.
pub fn sf(spec: &DistributionSpec, x: f64) -> f64 {
    let y = spec.base_argument(x);
    let v = if spec.reversed {
        base_cdf(spec.family, spec.shape, y)
    } else {
        base_sf(spec.family, spec.shape, y)
    };
    v.clamp(0.0, 1.0)
}

fn base_cdf(family: Family, shape: Option<f64>, x: f64) -> f64 {
    match family {
        Family::Heaviside => {
            if x < 0.0 {
                0.0
            } else {
                1.0
            }
        }
        Family::Uniform => {
            if x < -1.0 {
                0.0
            } else if x <= 1.0 {
                0.5 * (1.0 + x)
            } else {
                1.0
            }
        }
        Family::CubicHermite => {
            if x < -1.0 {
                0.0
            } else if x <= 1.0 {
                let y = 0.5 * (x + 1.0);
                y * y * (3.0 - 2.0 * y)
            } else {
                1.0
            }
        }
        Family::WignerSemicircle => {
            if x < -1.0 {
                0.0
            } else if x <= 1.0 {
                0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI
            } else {
                1.0
            }
        }
        Family::Gaussian => 0.5 * erfc(-x / std::f64::consts::SQRT_2),
        Family::Laplace => {
            if x <= 0.0 {
                0.5 * x.exp()
            } else {
                1.0 - 0.5 * (-x).exp()
            }
        }
        Family::Logistic => logistic(x),
        Family::HyperbolicSecant => FRAC_2_PI * (FRAC_PI_2 * x).exp().atan(),
        Family::Cauchy => x.atan() / PI + 0.5,
        Family::Reciprocal => x / (2.0 + 2.0 * x.abs()) + 0.5,
        Family::GumbelMax => (-(-x).exp()).exp(),
        Family::GumbelMin => -(-x.exp()).exp_m1(),
        Family::Exponential => {
            if x < 0.0 {
                0.0
            } else {
                -(-x).exp_m1()
            }
        }
        Family::Levy => {
            if x <= 0.0 {
                0.0
            } else {
                erfc((0.5 / x).sqrt())
            }
        }
        Family::Gamma => {
            if x <= 0.0 {
                0.0
            } else {
                regularized_lower_gamma(shape.unwrap_or(1.0), x).unwrap_or(f64::NAN)
            }
        }
    }
}

fn base_sf(family: Family, shape: Option<f64>, x: f64) -> f64 {
    match family {
        f if f.is_symmetric() => base_cdf(f, shape, -x),
        Family::Heaviside => 1.0 - base_cdf(family, shape, x),
        Family::GumbelMax => -(-(-x).exp()).exp_m1(),
        Family::GumbelMin => (-x.exp()).exp(),
        Family::Exponential => {
            if x < 0.0 {
                1.0
            } else {
                (-x).exp()
            }
        }
        Family::Levy => {
            if x <= 0.0 {
                1.0
            } else {
                erf((0.5 / x).sqrt())
            }
        }
        Family::Gamma => {
            if x <= 0.0 {
                1.0
            } else {
                regularized_upper_gamma(shape.unwrap_or(1.0), x).unwrap_or(f64::NAN)
            }
        }
        _ => unreachable!("symmetric families handled above"),
    }
}

fn base_pdf(family: Family, shape: Option<f64>, x: f64) -> f64 {
    match family {
        Family::Heaviside => 0.0,
        Family::Uniform => {
            if (-1.0..=1.0).contains(&x) {
                0.5
            } else {
                0.0
            }
        }
        Family::CubicHermite => {
            if (-1.0..=1.0).contains(&x) {
                let y = 0.5 * (x + 1.0);
                3.0 * y * (1.0 - y)
            } else {
                0.0
            }
        }
        Family::WignerSemicircle => {
            if (-1.0..=1.0).contains(&x) {
                FRAC_2_PI * (1.0 - x * x).sqrt()
            } else {
                0.0
            }
        }
        Family::Gaussian => INV_SQRT_2PI * (-0.5 * x * x).exp(),
        Family::Laplace => 0.5 * (-x.abs()).exp(),
        Family::Logistic => {
            let e = (-x.abs()).exp();
            e / ((1.0 + e) * (1.0 + e))
        }
        Family::HyperbolicSecant => 0.5 / (FRAC_PI_2 * x).cosh(),
        Family::Cauchy => 1.0 / (PI * (1.0 + x * x)),
        Family::Reciprocal => {
            let t = 1.0 + x.abs();
            0.5 / (t * t)
        }
        Family::GumbelMax => (-x - (-x).exp()).exp(),
        Family::GumbelMin => (x - x.exp()).exp(),
        Family::Exponential => {
            if x < 0.0 {
                0.0
            } else {
                (-x).exp()
            }
        }
        Family::Levy => {
            if x <= 0.0 {
                0.0
            } else {
                INV_SQRT_2PI * x.powf(-1.5) * (-0.5 / x).exp()
            }
        }
        Family::Gamma => {
            if x <= 0.0 {
                0.0
            } else {
                let p = shape.unwrap_or(1.0);
                ((p - 1.0) * x.ln() - x - ln_gamma(p)).exp()
            }
        }
    }
}

#[inline]
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        let mut opts: Vec<String> = Vec::new();
        if let Some(p) = self.shape {
            opts.push(format!("p={p}"));
        }
        if self.reversed {
            opts.push("rev".into());
        }
        if self.squares {
            opts.push("sq".into());
        }
        if self.shift != 0.0 {
            opts.push(format!("shift={}", self.shift));
        }
        if !opts.is_empty() {
            write!(f, "({})", opts.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Grammar: `name` or `name(opt,...)` with options `p=<real>` (gamma
    /// only), `rev`, `sq`, `shift=<real>`.
    fn from_str(input: &str) -> Result<Self> {
        const WHAT: &str = "distribution";
        let text = tokenize(WHAT, input)?;
        let family = Family::from_name(text.name)
            .ok_or_else(|| Error::parse(WHAT, input, format!("unknown family `{}`", text.name)))?;
        let mut shape = None;
        let mut squares = false;
        let mut reversed = false;
        let mut shift = 0.0;
        for opt in text.options {
            match opt {
                SpecOption::Flag("rev") | SpecOption::Flag("reversed") => reversed = true,
                SpecOption::Flag("sq") | SpecOption::Flag("squares") => squares = true,
                SpecOption::Value("p", v) => shape = Some(v),
                SpecOption::Value("shift", v) => shift = v,
                SpecOption::Flag(k) | SpecOption::Value(k, _) => {
                    return Err(Error::parse(WHAT, input, format!("unknown option `{k}`")))
                }
            }
        }
        let base = match (family, shape) {
            (Family::Gamma, Some(p)) => DistributionSpec::gamma(p)?,
            (Family::Gamma, None) => {
                return Err(Error::parse(WHAT, input, "gamma needs `p=<shape>`"))
            }
            (_, Some(_)) => {
                return Err(Error::parse(
                    WHAT,
                    input,
                    "only gamma takes a shape parameter",
                ))
            }
            (f, None) => DistributionSpec::new(f)?,
        };
        Ok(base
            .with_squares(squares)
            .with_reversed(reversed)
            .with_shift(shift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn point_values() {
        assert_eq!(cdf(&spec("logistic"), 0.0), 0.5);
        assert_eq!(cdf(&spec("uniform"), 1.0), 1.0);
        assert_eq!(cdf(&spec("uniform"), -1.0), 0.0);
        assert!((cdf(&spec("gamma(p=1)"), 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(cdf(&spec("levy"), 0.0), 0.0);
        assert_eq!(cdf(&spec("levy"), -3.0), 0.0);
        assert!((cdf(&spec("gumbel-min"), 0.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((cdf(&spec("gumbel-max"), 0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(cdf(&spec("heaviside"), 0.0), 1.0);
        assert_eq!(cdf(&spec("heaviside"), -1e-300), 0.0);
    }

    #[test]
    fn pdf_values() {
        assert_eq!(pdf(&spec("logistic"), 0.0), 0.25);
        assert_eq!(pdf(&spec("heaviside"), 0.3), 0.0);
        assert_eq!(pdf(&spec("uniform"), 0.0), 0.5);
        assert_eq!(pdf(&spec("uniform"), 1.5), 0.0);
    }

    #[test]
    fn reversal_is_dropped_for_symmetric_families() {
        assert!(!spec("logistic(rev)").reversed());
        assert!(spec("exponential(rev)").reversed());
        assert_eq!(spec("cauchy(rev,sq)").to_string(), "cauchy(sq)");
    }

    #[test]
    fn parse_round_trip_and_errors() {
        for s in [
            "gamma(p=0.5,rev,sq)",
            "logistic",
            "levy(rev,shift=1)",
            "uniform(sq)",
        ] {
            assert_eq!(spec(s).to_string(), s);
        }
        assert!("gamma".parse::<DistributionSpec>().is_err());
        assert!("logistic(p=2)".parse::<DistributionSpec>().is_err());
        assert!("bogus".parse::<DistributionSpec>().is_err());
        assert!("gamma(p=-1)".parse::<DistributionSpec>().is_err());
        assert!("logistic(wat)".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn squares_argument_matches_squared_distance_over_tau() {
        let s = spec("logistic(sq)");
        let (d, tau) = (-0.3, 0.02);
        let (x, _) = s.scaled_argument(d, tau);
        let expected = cdf(&spec("logistic"), d.abs() * d / tau);
        assert!((cdf(&s, x) - expected).abs() < 1e-15);
    }

    #[test]
    fn regime_codes() {
        let u = spec("uniform");
        assert_eq!(u.regime(-2.0, 0.0), 0);
        assert_eq!(u.regime(0.0, 0.0), 1);
        assert_eq!(u.regime(2.0, 0.0), 2);
        assert_eq!(u.regime(0.999, 0.01), 255);
        assert_eq!(spec("logistic").regime(0.0, 1.0), 0);
    }
}
