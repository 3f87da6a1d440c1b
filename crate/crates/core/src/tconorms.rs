//! T-conorms: the real-valued `or` that aggregates per-face occupancies.
//!
//! Every family provides the binary operation, its two partial derivatives
//! (used by the gradient pass), and the De Morgan dual T-norm
//! `⊤(a, b) = 1 - ⊥(1 - a, 1 - b)`.
//!
//! Aggregation over a pixel's faces is a left fold in ascending face order,
//! starting from the first value (equivalently from the neutral element 0).
//! `Average` is not a T-conorm; it aggregates by the arithmetic mean and is
//! kept as a baseline.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spec_text::{tokenize, SpecOption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TConormFamily {
    Max,
    Probabilistic,
    Einstein,
    Hamacher,
    Frank,
    Yager,
    AczelAlsina,
    Dombi,
    SchweizerSklar,
    Average,
}

impl TConormFamily {
    pub const ALL: [TConormFamily; 10] = [
        TConormFamily::Max,
        TConormFamily::Probabilistic,
        TConormFamily::Einstein,
        TConormFamily::Hamacher,
        TConormFamily::Frank,
        TConormFamily::Yager,
        TConormFamily::AczelAlsina,
        TConormFamily::Dombi,
        TConormFamily::SchweizerSklar,
        TConormFamily::Average,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TConormFamily::Max => "max",
            TConormFamily::Probabilistic => "probabilistic",
            TConormFamily::Einstein => "einstein",
            TConormFamily::Hamacher => "hamacher",
            TConormFamily::Frank => "frank",
            TConormFamily::Yager => "yager",
            TConormFamily::AczelAlsina => "aczel-alsina",
            TConormFamily::Dombi => "dombi",
            TConormFamily::SchweizerSklar => "schweizer-sklar",
            TConormFamily::Average => "average",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.to_ascii_lowercase().replace('_', "-");
        let alias = match name.as_str() {
            "maximum" => "max",
            "prob" | "probabilistic-sum" => "probabilistic",
            "aczél-alsina" => "aczel-alsina",
            "mean" => "average",
            other => other,
        };
        Self::ALL.into_iter().find(|f| f.name() == alias)
    }

    pub fn takes_parameter(self) -> bool {
        matches!(
            self,
            TConormFamily::Hamacher
                | TConormFamily::Frank
                | TConormFamily::Yager
                | TConormFamily::AczelAlsina
                | TConormFamily::Dombi
                | TConormFamily::SchweizerSklar
        )
    }

    /// `Average` violates associativity and the neutral element.
    pub fn is_tconorm(self) -> bool {
        self != TConormFamily::Average
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TConormSpec {
    family: TConormFamily,
    parameter: Option<f64>,
}

impl TConormSpec {
    /// Validates the parameter range of each family: `p ∈ (0, ∞)` for
    /// Hamacher, Frank (`p ≠ 1`), Yager, Aczél-Alsina and Dombi; `p < 0` for
    /// Schweizer-Sklar; no parameter for the others.
    pub fn new(family: TConormFamily, parameter: Option<f64>) -> Result<Self> {
        match (family.takes_parameter(), parameter) {
            (false, None) => {}
            (false, Some(_)) => {
                return Err(Error::config(format!(
                    "{} takes no parameter",
                    family.name()
                )))
            }
            (true, None) => {
                return Err(Error::config(format!(
                    "{} needs a parameter p",
                    family.name()
                )))
            }
            (true, Some(p)) => {
                let ok = p.is_finite()
                    && match family {
                        TConormFamily::SchweizerSklar => p < 0.0,
                        TConormFamily::Frank => p > 0.0 && p != 1.0,
                        _ => p > 0.0,
                    };
                if !ok {
                    return Err(Error::config(format!(
                        "parameter p={p} out of range for {}",
                        family.name()
                    )));
                }
            }
        }
        Ok(Self { family, parameter })
    }

    pub fn simple(family: TConormFamily) -> Self {
        Self::new(family, None).expect("family needs a parameter")
    }

    pub fn with_parameter(family: TConormFamily, p: f64) -> Result<Self> {
        Self::new(family, Some(p))
    }

    pub fn family(&self) -> TConormFamily {
        self.family
    }

    pub fn parameter(&self) -> Option<f64> {
        self.parameter
    }

    fn p(&self) -> f64 {
        self.parameter.unwrap_or(f64::NAN)
    }

    /// `⊥(a, b)`, clamped to `[0, 1]`.
    pub fn apply(&self, a: f64, b: f64) -> f64 {
        let v = match self.family {
            TConormFamily::Max => a.max(b),
            TConormFamily::Probabilistic => a + b - a * b,
            TConormFamily::Einstein => (a + b) / (1.0 + a * b),
            TConormFamily::Hamacher => {
                let p = self.p();
                (a + b + (p - 2.0) * a * b) / (1.0 + (p - 1.0) * a * b)
            }
            TConormFamily::Frank => {
                if a == 0.0 {
                    b
                } else if b == 0.0 {
                    a
                } else {
                    let p = self.p();
                    let q = 1.0 + (p.powf(1.0 - a) - 1.0) * (p.powf(1.0 - b) - 1.0) / (p - 1.0);
                    1.0 - q.ln() / p.ln()
                }
            }
            TConormFamily::Yager => p_norm(a, b, self.p()).min(1.0),
            TConormFamily::AczelAlsina => {
                if a >= 1.0 || b >= 1.0 {
                    1.0
                } else {
                    let r = p_norm(-(-a).ln_1p(), -(-b).ln_1p(), self.p());
                    -(-r).exp_m1()
                }
            }
            TConormFamily::Dombi => {
                if a == 0.0 {
                    b
                } else if b == 0.0 {
                    a
                } else if a >= 1.0 || b >= 1.0 {
                    1.0
                } else {
                    let r = p_norm(a / (1.0 - a), b / (1.0 - b), self.p());
                    r / (1.0 + r)
                }
            }
            TConormFamily::SchweizerSklar => {
                if a >= 1.0 || b >= 1.0 {
                    1.0
                } else {
                    let p = self.p();
                    1.0 - (ss_log_w(a, b, p) / p).exp()
                }
            }
            TConormFamily::Average => 0.5 * (a + b),
        };
        v.clamp(0.0, 1.0)
    }

    /// Partial derivative `∂⊥/∂a` at `(a, b)`.
    ///
    /// Non-smooth points take a fixed branch: `Max` credits `a` on ties,
    /// `Yager` is flat on its plateau `a^p + b^p ≥ 1`.
    pub fn partial_a(&self, a: f64, b: f64) -> f64 {
        match self.family {
            TConormFamily::Max => {
                if a >= b {
                    1.0
                } else {
                    0.0
                }
            }
            TConormFamily::Probabilistic => 1.0 - b,
            TConormFamily::Einstein => {
                let den = 1.0 + a * b;
                (1.0 - b * b) / (den * den)
            }
            TConormFamily::Hamacher => {
                let p = self.p();
                let n = a + b + (p - 2.0) * a * b;
                let d = 1.0 + (p - 1.0) * a * b;
                ((1.0 + (p - 2.0) * b) * d - n * (p - 1.0) * b) / (d * d)
            }
            TConormFamily::Frank => {
                let p = self.p();
                let pa = p.powf(1.0 - a);
                let pb1 = p.powf(1.0 - b) - 1.0;
                let q = 1.0 + (pa - 1.0) * pb1 / (p - 1.0);
                pa * pb1 / ((p - 1.0) * q)
            }
            TConormFamily::Yager => {
                let p = self.p();
                let r = p_norm(a, b, p);
                if r >= 1.0 {
                    0.0
                } else if a == 0.0 {
                    yager_edge(p)
                } else {
                    (a / r).powf(p - 1.0)
                }
            }
            TConormFamily::AczelAlsina => {
                if a >= 1.0 || b >= 1.0 {
                    return 0.0;
                }
                let p = self.p();
                let la = -(-a).ln_1p();
                let r = p_norm(la, -(-b).ln_1p(), p);
                if r == 0.0 {
                    // both zero; only reached by an explicit (0, 0) query
                    return if p == 1.0 { 1.0 } else { 0.0 };
                }
                let ratio = if la == 0.0 { yager_edge(p) } else { (la / r).powf(p - 1.0) };
                (-r).exp() * ratio / (1.0 - a)
            }
            TConormFamily::Dombi => {
                if a >= 1.0 || b >= 1.0 {
                    return 0.0;
                }
                if b == 0.0 {
                    return 1.0;
                }
                let p = self.p();
                let ta = a / (1.0 - a);
                let r = p_norm(ta, b / (1.0 - b), p);
                // at a = 0 the ratio vanishes for p > 1 and diverges for p < 1
                let ratio = if ta == 0.0 { yager_edge(p) } else { (ta / r).powf(p - 1.0) };
                ratio / ((1.0 + r) * (1.0 + r) * (1.0 - a) * (1.0 - a))
            }
            TConormFamily::SchweizerSklar => {
                if a >= 1.0 || b >= 1.0 {
                    return 0.0;
                }
                let p = self.p();
                let lw = ss_log_w(a, b, p);
                ((1.0 / p - 1.0) * lw + (p - 1.0) * (-a).ln_1p()).exp()
            }
            TConormFamily::Average => 0.5,
        }
    }

    /// Partial derivative `∂⊥/∂b` at `(a, b)`.
    pub fn partial_b(&self, a: f64, b: f64) -> f64 {
        match self.family {
            // keep the tie on the accumulator side
            TConormFamily::Max => {
                if b > a {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.partial_a(b, a),
        }
    }

    /// De Morgan dual T-norm `1 - ⊥(1 - a, 1 - b)`.
    pub fn tnorm_dual(&self, a: f64, b: f64) -> f64 {
        (1.0 - self.apply(1.0 - a, 1.0 - b)).clamp(0.0, 1.0)
    }

    /// Aggregates occupancies in the given order (ascending face index in
    /// the renderer). Empty input gives the neutral element 0.
    pub fn aggregate(&self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        if self.family == TConormFamily::Average {
            return (values.iter().sum::<f64>() / values.len() as f64).clamp(0.0, 1.0);
        }
        let mut acc = values[0].clamp(0.0, 1.0);
        for &v in &values[1..] {
            acc = self.apply(acc, v);
        }
        acc
    }

    /// Whether the fold at `(acc, b)` sits on the non-smooth branch, as a
    /// small code for kink detection (Max tie side, Yager plateau).
    pub fn regime(&self, a: f64, b: f64) -> u8 {
        match self.family {
            TConormFamily::Max => (a >= b) as u8,
            TConormFamily::Yager => {
                let p = self.p();
                (a.powf(p) + b.powf(p) >= 1.0) as u8
            }
            _ => 0,
        }
    }
}

/// `(x^p + y^p)^(1/p)` for `x, y ≥ 0`, scaled by the larger argument so
/// tiny or huge inputs neither underflow nor overflow.
fn p_norm(x: f64, y: f64, p: f64) -> f64 {
    let m = x.max(y);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * ((x / m).powf(p) + (y / m).powf(p)).powf(1.0 / p)
}

/// Limit of `(x / r)^(p - 1)` as `x → 0` with `r > 0` fixed.
fn yager_edge(p: f64) -> f64 {
    if p > 1.0 {
        0.0
    } else if p == 1.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// `ln((1 - a)^p + (1 - b)^p - 1)` for `p < 0`, accurate near 0 and for
/// arguments close to 1.
fn ss_log_w(a: f64, b: f64, p: f64) -> f64 {
    let la = p * (-a).ln_1p();
    let lb = p * (-b).ln_1p();
    let m = la.max(lb);
    if m < 1.0 {
        (la.exp_m1() + lb.exp_m1()).ln_1p()
    } else {
        m + ((la - m).exp() + (lb - m).exp() - (-m).exp()).ln()
    }
}

/// Free-function form of [`TConormSpec::apply`].
pub fn tconorm(spec: &TConormSpec, a: f64, b: f64) -> f64 {
    spec.apply(a, b)
}

/// Free-function form of [`TConormSpec::aggregate`].
pub fn aggregate(spec: &TConormSpec, values: &[f64]) -> f64 {
    spec.aggregate(values)
}

/// Free-function form of [`TConormSpec::tnorm_dual`].
pub fn tnorm_dual(spec: &TConormSpec, a: f64, b: f64) -> f64 {
    spec.tnorm_dual(a, b)
}

impl fmt::Display for TConormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        if let Some(p) = self.parameter {
            write!(f, "(p={p})")?;
        }
        Ok(())
    }
}

impl FromStr for TConormSpec {
    type Err = Error;

    /// Grammar: `max`, `probabilistic`, `einstein`, `average`, or
    /// `family(p=<real>)` for the parametric families.
    fn from_str(input: &str) -> Result<Self> {
        const WHAT: &str = "t-conorm";
        let text = tokenize(WHAT, input)?;
        let family = TConormFamily::from_name(text.name)
            .ok_or_else(|| Error::parse(WHAT, input, format!("unknown family `{}`", text.name)))?;
        let mut parameter = None;
        for opt in text.options {
            match opt {
                SpecOption::Value("p", v) => parameter = Some(v),
                SpecOption::Flag(k) | SpecOption::Value(k, _) => {
                    return Err(Error::parse(WHAT, input, format!("unknown option `{k}`")))
                }
            }
        }
        TConormSpec::new(family, parameter).map_err(|e| Error::parse(WHAT, input, e.to_string()))
    }
}

impl Default for TConormSpec {
    fn default() -> Self {
        Self::simple(TConormFamily::Probabilistic)
    }
}
