//! Named function library.
//!
//! Besides the fixed names `mean`, `second_moment`, `tanh_mean` and
//! `sin_second_moment`, any composition `g[ψ₁,…,ψₙ]` of catalogue
//! primitives is accepted, e.g. `tanh[x]`, `product[x,cos]`, `chi1[gamma_2_3]`.
//!
//! Outer names: `id square tanh sin cos expneg sum product`, `chi<l>`,
//! `clamp<w>`, `const<c>`. Inner names: `x`, `x<k>` (coordinate `k`,
//! 0-based), `sq`, `sin`, `sin<k>`, `cos`, `cos<k>`, `bump`, `gamma_<p>_<k>`.

use super::primitives::{Inner, Outer};
use super::CylindricalFunction;
use crate::error::{Error, Result};

pub fn parse_function(name: &str) -> Result<CylindricalFunction> {
    let name = name.trim();
    let named = match name {
        "mean" => Some((Outer::Identity, Inner::Coord(0))),
        "second_moment" => Some((Outer::Identity, Inner::SquaredNorm)),
        "tanh_mean" => Some((Outer::Tanh, Inner::Coord(0))),
        "sin_second_moment" => Some((Outer::Sin, Inner::SquaredNorm)),
        _ => None,
    };
    if let Some((g, psi)) = named {
        return Ok(CylindricalFunction::unary(g, psi));
    }
    let open = name.find('[').ok_or_else(|| unknown(name))?;
    if !name.ends_with(']') {
        return Err(unknown(name));
    }
    let outer = parse_outer(&name[..open]).ok_or_else(|| unknown(name))?;
    let args = &name[open + 1..name.len() - 1];
    let inner = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',').map(|a| parse_inner(a.trim()).ok_or_else(|| unknown(a))).collect::<Result<Vec<_>>>()?
    };
    CylindricalFunction::new(outer, inner)
}

fn unknown(name: &str) -> Error {
    Error::Parse(format!("unknown catalogue function `{name}`"))
}

fn parse_outer(s: &str) -> Option<Outer> {
    Some(match s {
        "id" => Outer::Identity,
        "square" => Outer::Square,
        "tanh" => Outer::Tanh,
        "sin" => Outer::Sin,
        "cos" => Outer::Cos,
        "expneg" => Outer::ExpNegSq,
        "sum" => Outer::Sum,
        "product" => Outer::Product,
        _ => {
            if let Some(l) = s.strip_prefix("chi") {
                let l: f64 = l.parse().ok()?;
                return (l > 0.0).then_some(Outer::Chi(l));
            }
            if let Some(w) = s.strip_prefix("clamp") {
                let w: f64 = w.parse().ok()?;
                return (w > 0.0).then_some(Outer::SmoothClamp(w));
            }
            if let Some(c) = s.strip_prefix("const") {
                return c.parse().ok().map(Outer::Const);
            }
            return None;
        }
    })
}

fn parse_inner(s: &str) -> Option<Inner> {
    Some(match s {
        "x" => Inner::Coord(0),
        "sq" => Inner::SquaredNorm,
        "sin" => Inner::Sin(0),
        "cos" => Inner::Cos(0),
        "bump" => Inner::Bump,
        _ => {
            if let Some(rest) = s.strip_prefix("gamma_") {
                let (p, k) = rest.split_once('_')?;
                let (p, k): (f64, f64) = (p.parse().ok()?, k.parse().ok()?);
                return (p >= 1.0 && k >= 0.0).then_some(Inner::GammaNorm { p, k });
            }
            for (prefix, make) in [("sin", Inner::Sin as fn(usize) -> Inner), ("cos", Inner::Cos), ("x", Inner::Coord)] {
                if let Some(k) = s.strip_prefix(prefix) {
                    return k.parse().ok().map(make);
                }
            }
            return None;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_functions() {
        assert_eq!(parse_function("mean").unwrap().to_string(), "id[x]");
        assert_eq!(parse_function("sin_second_moment").unwrap().to_string(), "sin[sq]");
        assert_eq!(parse_function("tanh_mean").unwrap().to_string(), "tanh[x]");
    }

    #[test]
    fn compositions_roundtrip_through_display() {
        for s in ["product[x,cos]", "sum[sq,bump,sin2]", "chi1[gamma_2_3]", "const1.5[]", "clamp0.1[x]", "expneg[x1]"] {
            let f = parse_function(s).unwrap();
            assert_eq!(parse_function(&f.to_string()).unwrap(), f, "{s}");
        }
    }

    #[test]
    fn rejects_unknown() {
        for s in ["median", "tanh[y]", "tanh[x", "foo[x]", "tanh[x,x]", "chi0[x]", "gamma_0.5_1[x]"] {
            assert!(parse_function(s).is_err(), "{s}");
        }
    }
}
