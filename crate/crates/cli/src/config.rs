//! `RunConfig`: the TOML run configuration. Keys mirror the field names
//! below; every section is optional and defaults as documented.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use supernorm::linalg::Mat;
use supernorm::verify::{registry, Arithmetic, Coefficients, InstanceSpec};
use supernorm::{Cq, NormMode, Scalar, Torus};

/// A configuration error naming the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.msg)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), msg: msg.into() }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Suite ids, or the groups `all`, `exact` and `float`.
    pub suites: Vec<String>,
    /// Trials per suite; each suite's default when absent.
    pub trials: Option<usize>,
    pub torus: TorusConfig,
    pub layout: LayoutConfig,
    pub norm: NormConfig,
    pub instance: InstanceConfig,
    pub covariance: CovarianceConfig,
    pub regulator: RegulatorConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusConfig {
    pub d: usize,
    /// Block side `R`.
    pub r: usize,
    pub m: usize,
}

/// Supersymmetric layout: one complex boson and one fermion pair per site.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub sites: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormConfig {
    pub p_n: u32,
    pub p_phi: u32,
    pub h: f64,
    /// Fluctuation scale of the regulators, at most `h`.
    pub ell: f64,
    pub mode: NormMode,
    /// Polygon size for complex grid mode.
    pub grid: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    pub max_terms: usize,
    pub max_degree: u32,
    pub coefficients: Coefficients,
}

/// A matrix entry: an integer, a float, or exact text such as `"1/3"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Entry {
    fn to_cq(&self) -> Option<Cq> {
        match self {
            Entry::Int(i) => Some(Cq::from_i64(*i)),
            Entry::Float(x) => Cq::parse_text(&format!("{x:e}"), "0"),
            Entry::Text(s) => Cq::parse_text(s, "0"),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum CovarianceConfig {
    Identity,
    /// `C[x][y] = kappa^|x - y|` on site indices, `0 <= kappa < 1`.
    Decaying { kappa: Entry },
    /// Explicit boson and fermion matrices.
    Inline { boson: Vec<Vec<Entry>>, fermion: Vec<Vec<Entry>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegulatorConfig {
    pub d_pi: u32,
    pub alpha_g: f64,
    /// Powers `t` of `E G^t`.
    pub t: Vec<f64>,
    pub samples: usize,
    /// Block sets `X`; all blocks as one set when empty.
    pub blocks: Vec<Vec<usize>>,
    /// Also tabulate the large-field regulator over the probe family.
    pub large_field: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = InstanceSpec::default();
        RunConfig {
            seed: spec.seed,
            suites: vec!["all".into()],
            trials: None,
            torus: TorusConfig { d: spec.d, r: spec.r, m: spec.m },
            layout: LayoutConfig { sites: spec.sites },
            norm: NormConfig::default(),
            instance: InstanceConfig::default(),
            covariance: CovarianceConfig::Identity,
            regulator: RegulatorConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Default for TorusConfig {
    fn default() -> Self {
        RunConfig::default().torus
    }
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig { sites: InstanceSpec::default().sites }
    }
}

impl Default for NormConfig {
    fn default() -> Self {
        let spec = InstanceSpec::default();
        NormConfig { p_n: spec.p_n, p_phi: spec.p_phi, h: spec.h, ell: spec.h, mode: NormMode::Exact, grid: 32 }
    }
}

impl Default for InstanceConfig {
    fn default() -> Self {
        let spec = InstanceSpec::default();
        InstanceConfig { max_terms: spec.max_terms, max_degree: spec.max_degree, coefficients: spec.coefficients }
    }
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig::Identity
    }
}

impl Default for RegulatorConfig {
    fn default() -> Self {
        RegulatorConfig { d_pi: 1, alpha_g: 1.1, t: vec![1.0], samples: 10_000, blocks: Vec::new(), large_field: false }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // serde names unknown or mistyped keys in the message itself
            let field = e.span().map(|s| text[s].split(['=', '\n']).next().unwrap_or("").trim().to_string());
            bad(field.filter(|f| !f.is_empty()).as_deref().unwrap_or("<file>"), msg)
        })
    }

    /// Checks every field before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let torus = self.torus().map_err(|e| bad("torus", e.to_string()))?;
        if self.layout.sites == 0 || self.layout.sites > 8 {
            return Err(bad("layout.sites", "must be between 1 and 8"));
        }
        let n = &self.norm;
        if !(n.h > 0.0 && n.h.is_finite()) {
            return Err(bad("norm.h", "must be positive"));
        }
        if !(n.ell > 0.0 && n.ell.is_finite()) {
            return Err(bad("norm.ell", "must be positive"));
        }
        if n.ell > n.h {
            return Err(bad("norm.ell", "must not exceed norm.h"));
        }
        if n.grid < 4 || n.grid % 2 != 0 {
            return Err(bad("norm.grid", "must be even and at least 4"));
        }
        if n.mode == NormMode::Exact && n.p_phi != 0 {
            return Err(bad("norm.mode", "exact mode needs norm.p_phi = 0; use lp or grid"));
        }
        if self.instance.max_terms == 0 {
            return Err(bad("instance.max_terms", "must be positive"));
        }
        if let Coefficients::RationalGrid { denominator, range, .. } = self.instance.coefficients {
            if denominator <= 0 || range <= 0 {
                return Err(bad("instance.coefficients", "denominator and range must be positive"));
            }
        }
        self.validate_covariance()?;
        self.validate_regulator(&torus)?;
        for s in &self.suites {
            if !is_group(s) && !registry().iter().any(|i| i.id == s) {
                return Err(bad("suites", format!("unknown suite `{s}`")));
            }
        }
        if self.trials == Some(usize::MAX) {
            return Err(bad("trials", "too large"));
        }
        Ok(())
    }

    fn validate_covariance(&self) -> Result<(), ConfigError> {
        match &self.covariance {
            CovarianceConfig::Identity => Ok(()),
            CovarianceConfig::Decaying { kappa } => {
                let k = kappa.to_cq().ok_or_else(|| bad("covariance.kappa", "not a number"))?;
                let kc = k.to_c64();
                if kc.im != 0.0 || !(0.0..1.0).contains(&kc.re) {
                    return Err(bad("covariance.kappa", "must satisfy 0 <= kappa < 1"));
                }
                Ok(())
            }
            CovarianceConfig::Inline { boson, fermion } => {
                for (name, rows) in [("covariance.boson", boson), ("covariance.fermion", fermion)] {
                    parse_matrix(rows).map_err(|msg| bad(name, msg))?;
                }
                Ok(())
            }
        }
    }

    fn validate_regulator(&self, torus: &Torus) -> Result<(), ConfigError> {
        let r = &self.regulator;
        if !(r.alpha_g > 1.0) {
            return Err(bad("regulator.alpha_g", "must exceed 1"));
        }
        if r.t.is_empty() || r.t.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(bad("regulator.t", "needs at least one power, each nonnegative"));
        }
        if r.samples == 0 {
            return Err(bad("regulator.samples", "must be positive"));
        }
        for x in &r.blocks {
            if x.is_empty() {
                return Err(bad("regulator.blocks", "block sets must be nonempty"));
            }
            if let Some(b) = x.iter().find(|&&b| b >= torus.num_blocks()) {
                return Err(bad("regulator.blocks", format!("block {b} is off the torus")));
            }
        }
        if r.large_field {
            // B^box spans 2^(d+1) - 1 blocks per axis and must embed without wrapping
            let need = (1usize << (torus.d + 1)) - 1;
            if torus.m < need {
                return Err(bad(
                    "regulator.large_field",
                    format!(
                        "Phi-tilde diameter guard: m R = {} must exceed the B^box diameter, \
                         which needs m >= {need} for d = {}",
                        torus.m * torus.r,
                        torus.d
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn torus(&self) -> supernorm::Result<Torus> {
        Torus::new(self.torus.d, self.torus.r, self.torus.m)
    }

    pub fn instance_spec(&self) -> InstanceSpec {
        InstanceSpec {
            d: self.torus.d,
            r: self.torus.r,
            m: self.torus.m,
            sites: self.layout.sites,
            max_terms: self.instance.max_terms,
            max_degree: self.instance.max_degree,
            p_n: self.norm.p_n,
            p_phi: self.norm.p_phi,
            h: self.norm.h,
            coefficients: self.instance.coefficients.clone(),
            seed: self.seed,
        }
    }

    /// Selected suite ids in registry order, groups expanded.
    pub fn suite_ids(&self) -> Vec<&'static str> {
        registry()
            .iter()
            .filter(|s| {
                self.suites.iter().any(|sel| match sel.as_str() {
                    "all" => true,
                    "exact" => s.arithmetic == Arithmetic::Exact,
                    "float" => s.arithmetic == Arithmetic::Float,
                    id => id == s.id,
                })
            })
            .map(|s| s.id)
            .collect()
    }

    /// Boson and fermion covariances on `n` sites.
    pub fn covariances(&self, n: usize) -> Result<(Mat<Cq>, Mat<Cq>), ConfigError> {
        match &self.covariance {
            CovarianceConfig::Identity => Ok((Mat::identity(n), Mat::identity(n))),
            CovarianceConfig::Decaying { kappa } => {
                let k = kappa.to_cq().ok_or_else(|| bad("covariance.kappa", "not a number"))?;
                let m = supernorm::gaussian::decaying(n, &k);
                Ok((m.clone(), m))
            }
            CovarianceConfig::Inline { boson, fermion } => {
                let b = parse_matrix(boson).map_err(|m| bad("covariance.boson", m))?;
                let f = parse_matrix(fermion).map_err(|m| bad("covariance.fermion", m))?;
                for (name, m) in [("covariance.boson", &b), ("covariance.fermion", &f)] {
                    if m.n != n {
                        return Err(bad(name, format!("is {0} x {0}, the layout needs {n} x {n}", m.n)));
                    }
                }
                Ok((b, f))
            }
        }
    }
}

pub fn is_group(s: &str) -> bool {
    matches!(s, "all" | "exact" | "float")
}

fn parse_matrix(rows: &[Vec<Entry>]) -> Result<Mat<Cq>, String> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err("must be a nonempty square matrix".into());
    }
    let parsed: Option<Vec<Vec<Cq>>> = rows.iter().map(|r| r.iter().map(Entry::to_cq).collect()).collect();
    let parsed = parsed.ok_or("entries must be numbers or rationals like \"1/3\"")?;
    let m = Mat::from_rows(parsed).map_err(|e| e.to_string())?;
    let floating = rows.iter().flatten().any(|e| matches!(e, Entry::Float(_)));
    let symmetric = if floating { m.to_c64().is_symmetric(1e-12) } else { m.is_symmetric(0.0) };
    if !symmetric {
        return Err("must be symmetric".into());
    }
    if floating {
        // symmetrise away the rounding that passed the tolerance
        let half = Cq::parse_text("1/2", "0").unwrap();
        return Ok(m.add(&m.transpose()).scale(&half));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::parse("").unwrap().suite_ids().len(), registry().len());
    }

    #[test]
    fn errors_name_the_field() {
        let c = RunConfig::parse("[torus]\nr = 1\n").unwrap();
        assert_eq!(c.validate().unwrap_err().field, "torus");
        let c = RunConfig::parse("[norm]\nh = -1.0\n").unwrap();
        assert_eq!(c.validate().unwrap_err().field, "norm.h");
        let c = RunConfig::parse("suites = [\"nope\"]\n").unwrap();
        assert_eq!(c.validate().unwrap_err().field, "suites");
        let c = RunConfig::parse("[regulator]\nlarge_field = true\n").unwrap();
        let e = c.validate().unwrap_err();
        assert_eq!(e.field, "regulator.large_field");
        assert!(e.msg.contains("diameter guard"));
        let e = RunConfig::parse("[norm]\nhh = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("hh"), "{e}");
    }

    #[test]
    fn covariance_sources() {
        let c = RunConfig::parse("[covariance]\nkind = \"decaying\"\nkappa = \"1/2\"\n").unwrap();
        c.validate().unwrap();
        let (b, _) = c.covariances(3).unwrap();
        assert_eq!(b.get(0, 2), Cq::parse_text("1/4", "0").unwrap());
        let c = RunConfig::parse("[covariance]\nkind = \"inline\"\nboson = [[2, 1], [1, 2]]\nfermion = [[\"1/2\"]]\n")
            .unwrap();
        c.validate().unwrap();
        assert_eq!(c.covariances(2).unwrap_err().field, "covariance.fermion");
    }

    #[test]
    fn groups_expand() {
        let c = RunConfig::parse("suites = [\"exact\", \"gram\"]\n").unwrap();
        let ids = c.suite_ids();
        assert!(ids.contains(&"convolution") && ids.contains(&"gram") && !ids.contains(&"product-property"));
    }
}
