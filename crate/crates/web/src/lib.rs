//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export works on the uniform base on `[0,1]` with the cosine basis
//! and the power spectrum `αₙ = a·nˢ`. The plain Rust functions carry the
//! logic and are tested natively; the `#[wasm_bindgen]` wrappers only turn
//! errors into JS exceptions.

use wasm_bindgen::prelude::*;
use wgauss::measure::{draw_pushed, tangent_norm, BaseMeasure, EigenBasis};
use wgauss::ou::{simulate_path, Init};
use wgauss::rng::stream;
use wgauss::spectral::{heat_kernel_sq_bound, Spectrum};
use wgauss::wasserstein::w1d;
use wgauss::{Error, Result};

/// Largest model the page may request; keeps a click well under a second.
pub const MAX_MODES: usize = 200;
pub const MAX_ATOMS: usize = 2000;
pub const MAX_STEPS: usize = 2000;

fn model(a: f64, s: f64, modes: usize, atoms: usize) -> Result<(Spectrum, EigenBasis)> {
    if modes > MAX_MODES || atoms > MAX_ATOMS {
        return Err(Error::InvalidArgument(format!("demo limits are {MAX_MODES} modes and {MAX_ATOMS} atoms")));
    }
    let spectrum = Spectrum::power(a, s, modes)?;
    let basis = EigenBasis::cosine(&BaseMeasure::uniform01(atoms)?, modes)?;
    Ok((spectrum, basis))
}

/// `[t, log exact trace, log bound]` triples on a log-spaced grid of
/// `points` times in `[t_min, t_max]`. Times outside the regime where the
/// tail bound applies get `NaN` in both log columns.
pub fn heat_curve(a: f64, s: f64, modes: usize, t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && points >= 2) {
        return Err(Error::InvalidArgument("need 0 < t_min < t_max and at least 2 points".into()));
    }
    if modes > MAX_MODES || points > MAX_STEPS {
        return Err(Error::InvalidArgument(format!("demo limits are {MAX_MODES} modes and {MAX_STEPS} points")));
    }
    let spectrum = Spectrum::power(a, s, modes)?;
    let ratio = (t_max / t_min).ln() / (points - 1) as f64;
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let t = t_min * (ratio * i as f64).exp();
        let (exact, bound) = match heat_kernel_sq_bound(&spectrum, t) {
            Ok(h) => (h.log_exact, h.log_bound()),
            Err(Error::TailRegime { .. }) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        out.extend([t, exact, bound]);
    }
    Ok(out)
}

/// Atom positions of one stationary OU path on `steps + 1` equally spaced
/// times in `[0, t_end]`, row-major by time.
pub fn ou_cloud(a: f64, s: f64, modes: usize, atoms: usize, t_end: f64, steps: usize, seed: u64) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || steps == 0 || steps > MAX_STEPS {
        return Err(Error::InvalidArgument(format!("need t_end > 0 and 1..={MAX_STEPS} steps")));
    }
    let (spectrum, basis) = model(a, s, modes, atoms)?;
    let grid: Vec<f64> = (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect();
    let path = simulate_path(&spectrum, &basis, &grid, &Init::Stationary, seed)?;
    let mut out = Vec::with_capacity(grid.len() * atoms);
    for k in 0..grid.len() {
        out.extend_from_slice(path.pushed(&basis, k)?.points());
    }
    Ok(out)
}

/// Two independent draws `Ψ(φ₁)`, `Ψ(φ₂)`: returns
/// `[W_p, ‖φ₁ - φ₂‖_{L^p}, atoms of the first…, atoms of the second…]`.
pub fn draw_pair(a: f64, s: f64, modes: usize, atoms: usize, p: f64, seed: u64) -> Result<Vec<f64>> {
    let (spectrum, basis) = model(a, s, modes, atoms)?;
    let mut rng = stream(seed, 0);
    let (c1, mu) = draw_pushed(&spectrum, &basis, &mut rng);
    let (c2, nu) = draw_pushed(&spectrum, &basis, &mut rng);
    let (w, _) = w1d(&mu, &nu, p)?;
    let norm = tangent_norm(basis.base().measure(), &basis.synthesize(&c1)?.sub(&basis.synthesize(&c2)?)?, p)?;
    let mut out = vec![w, norm];
    out.extend_from_slice(mu.points());
    out.extend_from_slice(nu.points());
    Ok(out)
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = heatCurve)]
pub fn heat_curve_js(a: f64, s: f64, modes: usize, t_min: f64, t_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(heat_curve(a, s, modes, t_min, t_max, points))
}

#[wasm_bindgen(js_name = ouCloud)]
pub fn ou_cloud_js(a: f64, s: f64, modes: usize, atoms: usize, t_end: f64, steps: usize, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(ou_cloud(a, s, modes, atoms, t_end, steps, seed.into()))
}

#[wasm_bindgen(js_name = drawPair)]
pub fn draw_pair_js(a: f64, s: f64, modes: usize, atoms: usize, p: f64, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(draw_pair(a, s, modes, atoms, p, seed.into()))
}
