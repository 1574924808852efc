//! Flat `key = value` configuration with dotted section names.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown or repeated keys
//! are rejected so typos cannot silently fall back to defaults. Lists are
//! comma separated; commas inside `[...]` or `(...)` belong to the item.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use wgauss::calculus::{parse_function, CylindricalFunction};
use wgauss::dirichlet::TangentFunctional;
use wgauss::measure::{gram_tol, BaseKind, BaseMeasure, EigenBasis};
use wgauss::spectral::Spectrum;

use crate::CliError;

/// `(key, default)`. An empty default means "unset".
const DEFAULTS: &[(&str, &str)] = &[
    ("spectrum.family", "power"),
    ("spectrum.a", "1"),
    ("spectrum.s", "2"),
    ("spectrum.alphas", ""),
    ("basis.M", "8"),
    ("base.kind", "uniform01"),
    ("base.N", "32"),
    ("base.dim", "1"),
    ("base.seed", "0"),
    ("mc.n_samples", "100000"),
    ("mc.seed", ""),
    ("functions", "mean,second_moment,tanh_mean,sin_second_moment"),
    ("verify.cases", "100"),
    ("ibp.u", "mean,tanh_mean,sin_second_moment"),
    ("ibp.v", "const1[],cos[x],tanh[sq]"),
    ("ibp.modes", "1,2,3"),
    ("semigroup.k_max", "4"),
    ("semigroup.modes", "1,2"),
    ("semigroup.t", "0.1,0.5,2"),
    ("semigroup.x0", "0.8"),
    ("galerkin.sub", "const1[],mean,second_moment,tanh_mean,sin_second_moment,cos[x]"),
    ("galerkin.extra", "c2,c3,H2(c1)"),
    ("invariance.scale", "2"),
    ("invariance.functions", "mean,second_moment,tanh_mean"),
    ("invariance.draws", "10000"),
    ("c1.constant", "1"),
    ("tol.chain_rule", "1e-6"),
    ("tol.lipschitz", "1e-12"),
    ("tol.orthonormality", "auto"),
    ("tol.ks_level", "0.01"),
    ("solver.method", "exact"),
    ("solver.p", "2"),
    ("solver.epsilon", "1e-4"),
    ("solver.max_iter", "200000"),
    ("heat.t", "1"),
    ("simulate.t_grid", "0,0.25,0.5,1,2"),
    ("simulate.paths", "1000"),
    ("simulate.init", "stationary"),
    ("out.dir", "wgauss-out"),
];

/// Seed used when no configuration file is given.
const BUILTIN_SEED: &str = "0";

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Settings {
    /// Defaults, overlaid by `file` (if any) and then by `overrides`.
    ///
    /// A configuration file must set `mc.seed`; without a file the built-in
    /// seed applies. Seeds never come from the clock.
    pub fn load(file: Option<&str>, overrides: &[String]) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut seen = BTreeMap::new();
        if let Some(text) = file {
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
                let k = k.trim();
                if seen.insert(k.to_string(), ()).is_some() {
                    return Err(config_err(format!("line {}: key `{k}` set twice", lineno + 1)));
                }
                Self::set(&mut values, k, v.trim())?;
            }
            if values["mc.seed"].is_empty() {
                return Err(config_err("configuration file must set mc.seed"));
            }
        } else {
            values.insert("mc.seed".into(), BUILTIN_SEED.into());
        }
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| config_err(format!("override `{o}` is not key=value")))?;
            Self::set(&mut values, k.trim(), v.trim())?;
        }
        Ok(Self { values })
    }

    fn set(values: &mut BTreeMap<String, String>, k: &str, v: &str) -> Result<(), CliError> {
        match values.get_mut(k) {
            Some(slot) => {
                *slot = v.to_string();
                Ok(())
            }
            None => Err(config_err(format!("unknown key `{k}`"))),
        }
    }

    /// The effective configuration in file syntax.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn str(&self, key: &str) -> &str {
        &self.values[key]
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.str(key);
        v.parse().map_err(|_| config_err(format!("`{key}` = `{v}` is not a valid value")))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_err(format!("`{key}` must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        split_list(self.str(key))
    }

    pub fn parse_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        self.list(key)
            .iter()
            .map(|v| v.parse().map_err(|_| config_err(format!("`{key}` entry `{v}` is not a valid value"))))
            .collect()
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parse("mc.seed")
    }

    pub fn functions(&self, key: &str) -> Result<Vec<CylindricalFunction>, CliError> {
        self.list(key).iter().map(|n| parse_function(n).map_err(|e| config_err(format!("`{key}`: {e}")))).collect()
    }

    pub fn spectrum(&self) -> Result<Spectrum, CliError> {
        let m: usize = self.parse("basis.M")?;
        let s = match self.str("spectrum.family") {
            "power" => Spectrum::power(self.parse("spectrum.a")?, self.parse("spectrum.s")?, m),
            "explicit" => {
                let alphas: Vec<f64> = self.parse_list("spectrum.alphas")?;
                if alphas.len() != m {
                    return Err(config_err(format!("spectrum.alphas has {} entries but basis.M = {m}", alphas.len())));
                }
                Spectrum::explicit(alphas)
            }
            other => return Err(config_err(format!("unknown spectrum.family `{other}`"))),
        };
        s.map_err(|e| config_err(e.to_string()))
    }

    pub fn base(&self) -> Result<BaseMeasure, CliError> {
        let kind = match self.str("base.kind") {
            "uniform01" => BaseKind::Uniform01,
            "gaussian" => BaseKind::Gaussian,
            other => return Err(config_err(format!("unknown base.kind `{other}`"))),
        };
        BaseMeasure::new(kind, self.parse("base.N")?, self.parse("base.dim")?, Some(self.parse("base.seed")?))
            .map_err(|e| config_err(e.to_string()))
    }

    /// The cosine basis needs the uniform base; other bases get a
    /// polynomial basis orthonormalized on the base atoms.
    pub fn basis(&self) -> Result<EigenBasis, CliError> {
        let base = self.base()?;
        let m: usize = self.parse("basis.M")?;
        match base.kind() {
            BaseKind::Uniform01 => EigenBasis::cosine(&base, m),
            _ => EigenBasis::polynomial(&base, m),
        }
        .map_err(|e| config_err(e.to_string()))
    }

    pub fn orthonormality_tol(&self, basis: &EigenBasis) -> Result<f64, CliError> {
        if self.str("tol.orthonormality") == "auto" {
            return Ok(gram_tol(basis.modes(), basis.base().len()));
        }
        self.positive("tol.orthonormality")
    }

    /// Galerkin dictionary entries: catalogue names, `c<n>` and `H<k>(c<n>)`.
    pub fn dictionary(&self, key: &str, spectrum: &Spectrum) -> Result<Vec<TangentFunctional>, CliError> {
        self.list(key).iter().map(|n| parse_dictionary_entry(n, spectrum).map_err(|e| config_err(format!("`{key}`: {e}")))).collect()
    }

    /// Every tolerance must be positive; checked up front for every command.
    pub fn validate(&self) -> Result<(), CliError> {
        for key in ["tol.chain_rule", "tol.lipschitz", "tol.ks_level", "solver.epsilon", "c1.constant"] {
            self.positive(key)?;
        }
        if self.str("tol.orthonormality") != "auto" {
            self.positive("tol.orthonormality")?;
        }
        self.seed()?;
        Ok(())
    }
}

fn parse_dictionary_entry(name: &str, spectrum: &Spectrum) -> Result<TangentFunctional, String> {
    if let Some(n) = name.strip_prefix('c').and_then(|r| r.parse::<usize>().ok()) {
        return Ok(TangentFunctional::Coefficient(n));
    }
    if let Some(rest) = name.strip_prefix('H') {
        if let Some((k, mode)) = rest.strip_suffix(')').and_then(|r| r.split_once("(c")) {
            if let (Ok(k), Ok(mode)) = (k.parse(), mode.parse()) {
                return TangentFunctional::hermite(spectrum, mode, k).map_err(|e| e.to_string());
            }
        }
    }
    parse_function(name).map(Into::into).map_err(|e| e.to_string())
}

/// Splits on commas outside brackets and parentheses.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            _ => {}
        }
        if ch == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_splitting_respects_brackets() {
        assert_eq!(split_list("mean, product[x,cos] ,H2(c1)"), vec!["mean", "product[x,cos]", "H2(c1)"]);
        assert!(split_list("").is_empty());
    }

    #[test]
    fn file_needs_seed_and_known_keys() {
        assert!(Settings::load(Some("basis.M = 4"), &[]).is_err());
        assert!(Settings::load(Some("mc.seed = 3\nbogus = 1"), &[]).is_err());
        assert!(Settings::load(Some("mc.seed = 3\nmc.seed = 4"), &[]).is_err());
        let s = Settings::load(Some("# comment\nmc.seed = 3 # trailing\n\nbasis.M = 4"), &["base.N=64".into()]).unwrap();
        assert_eq!(s.seed().unwrap(), 3);
        assert_eq!(s.parse::<usize>("base.N").unwrap(), 64);
    }

    #[test]
    fn builtin_seed_without_file() {
        assert_eq!(Settings::load(None, &[]).unwrap().seed().unwrap(), 0);
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        let s = Settings::load(None, &["tol.chain_rule=0".into()]).unwrap();
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn dictionary_entries() {
        let sp = Spectrum::power(1.0, 2.0, 3).unwrap();
        let s = Settings::load(None, &[]).unwrap();
        let d = s.dictionary("galerkin.extra", &sp).unwrap();
        assert_eq!(d[0], TangentFunctional::Coefficient(2));
        assert_eq!(d[2], TangentFunctional::hermite(&sp, 1, 2).unwrap());
        assert!(parse_dictionary_entry("median", &sp).is_err());
    }

    #[test]
    fn render_roundtrips() {
        let s = Settings::load(None, &["basis.M=5".into()]).unwrap();
        assert_eq!(Settings::load(Some(&s.render()), &[]).unwrap(), s);
    }
}
