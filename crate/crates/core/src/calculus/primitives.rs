//! Closed-form building blocks: outer functions `g: ℝⁿ → ℝ` and inner test
//! functions `ψ: ℝ^d → ℝ`, each with its gradient and a declared bound on
//! the gradient norm (`∞` when unbounded).

use std::fmt;

use super::reference::{chi, chi_deriv, gamma_k, gamma_k_deriv};
use crate::measure::dot;

/// `sup_r |d/dr e^{-r²}| = √(2/e)`.
const EXPNEG_SLOPE: f64 = 0.857_763_884_960_706_8;
/// `sup_x ‖∇e^{-|x|²/2}‖ = e^{-1/2}`.
const BUMP_SLOPE: f64 = 0.606_530_659_712_633_4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outer {
    Const(f64),
    Identity,
    Square,
    Tanh,
    Sin,
    Cos,
    /// `e^{-r²}`.
    ExpNegSq,
    /// The reference cutoff `χ_l`.
    Chi(f64),
    /// `C¹` approximant of `r ↦ min(max(r, 0), 1)` whose slope ramps over
    /// windows of the given width around 0 and 1; `0 ≤ τ' ≤ 1`.
    SmoothClamp(f64),
    Sum,
    Product,
}

impl Outer {
    pub fn is_unary(&self) -> bool {
        !matches!(self, Outer::Const(_) | Outer::Sum | Outer::Product)
    }

    pub fn eval(&self, r: &[f64]) -> f64 {
        match *self {
            Outer::Const(c) => c,
            Outer::Identity => r[0],
            Outer::Square => r[0] * r[0],
            Outer::Tanh => r[0].tanh(),
            Outer::Sin => r[0].sin(),
            Outer::Cos => r[0].cos(),
            Outer::ExpNegSq => (-r[0] * r[0]).exp(),
            Outer::Chi(l) => chi(l, r[0]),
            Outer::SmoothClamp(w) => smooth_clamp(w, r[0]),
            Outer::Sum => r.iter().sum(),
            Outer::Product => r.iter().product(),
        }
    }

    pub fn grad(&self, r: &[f64], out: &mut [f64]) {
        match *self {
            Outer::Const(_) => out.fill(0.0),
            Outer::Identity => out[0] = 1.0,
            Outer::Square => out[0] = 2.0 * r[0],
            Outer::Tanh => {
                let t = r[0].tanh();
                out[0] = 1.0 - t * t;
            }
            Outer::Sin => out[0] = r[0].cos(),
            Outer::Cos => out[0] = -r[0].sin(),
            Outer::ExpNegSq => out[0] = -2.0 * r[0] * (-r[0] * r[0]).exp(),
            Outer::Chi(l) => out[0] = chi_deriv(l, r[0]),
            Outer::SmoothClamp(w) => out[0] = smooth_clamp_deriv(w, r[0]),
            Outer::Sum => out.fill(1.0),
            Outer::Product => {
                for k in 0..r.len() {
                    out[k] = r.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, v)| v).product();
                }
            }
        }
    }

    /// `sup |∂ₖ g|` for argument `k` of an `n`-ary call.
    pub fn partial_bound(&self) -> f64 {
        match *self {
            Outer::Const(_) => 0.0,
            Outer::Identity | Outer::Tanh | Outer::Sin | Outer::Cos | Outer::Sum => 1.0,
            Outer::Chi(_) | Outer::SmoothClamp(_) => 1.0,
            Outer::ExpNegSq => EXPNEG_SLOPE,
            Outer::Square | Outer::Product => f64::INFINITY,
        }
    }
}

fn smooth_clamp_deriv(w: f64, r: f64) -> f64 {
    let h = 0.5 * w;
    ((r + h) / w).clamp(0.0, 1.0).min(((1.0 + h - r) / w).clamp(0.0, 1.0))
}

/// Equals the hard clamp outside `[-w/2, w/2] ∪ [1-w/2, 1+w/2]`.
fn smooth_clamp(w: f64, r: f64) -> f64 {
    let h = 0.5 * w;
    if r <= -h {
        0.0
    } else if r <= h {
        (r + h) * (r + h) / (2.0 * w)
    } else if r <= 1.0 - h {
        r
    } else if r <= 1.0 + h {
        let s = r - (1.0 - h);
        1.0 - h + s - s * s / (2.0 * w)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inner {
    /// `x ↦ x_k`.
    Coord(usize),
    /// `x ↦ |x|²`.
    SquaredNorm,
    /// `x ↦ sin x_k`.
    Sin(usize),
    /// `x ↦ cos x_k`.
    Cos(usize),
    /// `x ↦ e^{-|x|²/2}`.
    Bump,
    /// `x ↦ γ_k(‖x‖)` with `γ_k(s) = (1 + ((s-k)⁺)²)^{p/2} - 1`.
    GammaNorm { p: f64, k: f64 },
}

impl Inner {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Inner::Coord(k) => x[k],
            Inner::SquaredNorm => dot(x, x),
            Inner::Sin(k) => x[k].sin(),
            Inner::Cos(k) => x[k].cos(),
            Inner::Bump => (-0.5 * dot(x, x)).exp(),
            Inner::GammaNorm { p, k } => gamma_k(p, k, dot(x, x).sqrt()),
        }
    }

    /// Adds `scale·∇ψ(x)` into `out`.
    pub fn add_grad(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        match *self {
            Inner::Coord(k) => out[k] += scale,
            Inner::SquaredNorm => out.iter_mut().zip(x).for_each(|(o, v)| *o += 2.0 * scale * v),
            Inner::Sin(k) => out[k] += scale * x[k].cos(),
            Inner::Cos(k) => out[k] -= scale * x[k].sin(),
            Inner::Bump => {
                let e = (-0.5 * dot(x, x)).exp();
                out.iter_mut().zip(x).for_each(|(o, v)| *o -= scale * v * e);
            }
            Inner::GammaNorm { p, k } => {
                let s = dot(x, x).sqrt();
                let d = gamma_k_deriv(p, k, s);
                if d != 0.0 && s > 0.0 {
                    out.iter_mut().zip(x).for_each(|(o, v)| *o += scale * d * v / s);
                }
            }
        }
    }

    /// `sup ‖∇ψ‖`.
    pub fn grad_bound(&self) -> f64 {
        match *self {
            Inner::Coord(_) | Inner::Sin(_) | Inner::Cos(_) => 1.0,
            Inner::SquaredNorm => f64::INFINITY,
            Inner::Bump => BUMP_SLOPE,
            Inner::GammaNorm { p, .. } => {
                if p <= 1.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn max_coord(&self) -> Option<usize> {
        match *self {
            Inner::Coord(k) | Inner::Sin(k) | Inner::Cos(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Outer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outer::Const(c) => write!(f, "const{c}"),
            Outer::Identity => f.write_str("id"),
            Outer::Square => f.write_str("square"),
            Outer::Tanh => f.write_str("tanh"),
            Outer::Sin => f.write_str("sin"),
            Outer::Cos => f.write_str("cos"),
            Outer::ExpNegSq => f.write_str("expneg"),
            Outer::Chi(l) => write!(f, "chi{l}"),
            Outer::SmoothClamp(w) => write!(f, "clamp{w}"),
            Outer::Sum => f.write_str("sum"),
            Outer::Product => f.write_str("product"),
        }
    }
}

impl fmt::Display for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inner::Coord(0) => f.write_str("x"),
            Inner::Coord(k) => write!(f, "x{k}"),
            Inner::SquaredNorm => f.write_str("sq"),
            Inner::Sin(0) => f.write_str("sin"),
            Inner::Sin(k) => write!(f, "sin{k}"),
            Inner::Cos(0) => f.write_str("cos"),
            Inner::Cos(k) => write!(f, "cos{k}"),
            Inner::Bump => f.write_str("bump"),
            Inner::GammaNorm { p, k } => write!(f, "gamma_{p}_{k}"),
        }
    }
}
