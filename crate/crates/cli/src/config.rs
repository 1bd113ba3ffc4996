//! Experiment configuration: a single serializable description of what to
//! run. Configs round-trip losslessly through TOML, and the SHA-256 of the
//! canonical TOML form is embedded in every report.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use trace_forms_core::body::Body;
use trace_forms_core::exterior::random_matrix;
use trace_forms_core::lp::{Exponent, LpBody};
use trace_forms_core::measures::{BoundaryScheme, MeasureSpec};
use trace_forms_core::polytope::{
    cross_polytope, cube, hexagon, random_asymmetric_polytope, random_symmetric_polytope,
};
use trace_forms_core::quadrature::Scheme;
use trace_forms_core::smooth::SmoothSupportBody;
use trace_forms_core::sphere_fn::SphereFunction;

use crate::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Scalar fields precede table-valued fields so the TOML form is valid in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    pub kind: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentKind {
    Exact {
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
    ConeAvg {
        n: usize,
        k: usize,
    },
    HyperAvg {
        n: usize,
        k: usize,
    },
    Isotropy,
    Discrete,
    DesignCheck {
        group: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        all_k: bool,
        trials: usize,
    },
    Grassmann {
        n: usize,
        k: usize,
        samples: u64,
    },
    Perturb {
        g: String,
        ladder: Vec<f64>,
    },
    AlphaScan {
        g: String,
        alphas: Vec<f64>,
        ladder: Vec<f64>,
    },
    Repro {
        case: String,
    },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Exact { .. } => "exact",
            ExperimentKind::ConeAvg { .. } => "cone-avg",
            ExperimentKind::HyperAvg { .. } => "hyper-avg",
            ExperimentKind::Isotropy => "isotropy",
            ExperimentKind::Discrete => "discrete",
            ExperimentKind::DesignCheck { .. } => "design-check",
            ExperimentKind::Grassmann { .. } => "grassmann",
            ExperimentKind::Perturb { .. } => "perturb",
            ExperimentKind::AlphaScan { .. } => "alpha-scan",
            ExperimentKind::Repro { .. } => "repro",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum BodySpec {
    Cube {
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        r: f64,
    },
    Cross {
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Hexagon,
    Lp {
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        p: f64,
    },
    Linf {
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Smooth {
        eps: f64,
        g: String,
    },
    RandomPoly {
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        extra: usize,
        seed: u64,
    },
    RandomSymPoly {
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        slabs: usize,
        seed: u64,
    },
}

fn split_params(rest: &str) -> Result<Vec<(String, String)>> {
    rest.split(',')
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected key=value, got `{}`", pair)))?;
            Ok((key.trim().to_string(), value.trim().to_string()))
        })
        .collect()
}

struct Params(Vec<(String, String)>);

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        let pos = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(pos).1)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("cannot parse {}=`{}`", key, v))),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str, ctx: &str) -> Result<T> {
        self.take_parsed(key)?
            .ok_or_else(|| CliError::Config(format!("{} requires {}=...", ctx, key)))
    }

    fn finish(self, ctx: &str) -> Result<()> {
        if let Some((k, _)) = self.0.first() {
            return Err(CliError::Config(format!("unknown parameter `{}` for {}", k, ctx)));
        }
        Ok(())
    }
}

impl BodySpec {
    /// Accepts `family` or `family:key=value,...`; e.g. `linf:m=6`,
    /// `lp:m=3,p=3.5`, `smooth:eps=0.25,g=cos2`, `random-poly:m=3,extra=4,seed=9`.
    pub fn parse(text: &str) -> Result<BodySpec> {
        let (family, rest) = match text.split_once(':') {
            Some((f, r)) => (f.trim(), r),
            None => (text.trim(), ""),
        };
        let mut params = Params(split_params(rest)?);
        let spec = match family {
            "cube" => BodySpec::Cube {
                m: params.take_parsed("m")?,
                r: params.take_parsed("r")?.unwrap_or(1.0),
            },
            "cross" => BodySpec::Cross { m: params.take_parsed("m")? },
            "hexagon" => BodySpec::Hexagon,
            "lp" => BodySpec::Lp {
                m: params.take_parsed("m")?,
                p: params.require("p", "lp body")?,
            },
            "l1" => BodySpec::Lp { m: params.take_parsed("m")?, p: 1.0 },
            "l2" => BodySpec::Lp { m: params.take_parsed("m")?, p: 2.0 },
            "linf" => BodySpec::Linf { m: params.take_parsed("m")? },
            "smooth" => BodySpec::Smooth {
                eps: params.require("eps", "smooth body")?,
                g: params.require("g", "smooth body")?,
            },
            "random-poly" => BodySpec::RandomPoly {
                m: params.take_parsed("m")?,
                extra: params.take_parsed("extra")?.unwrap_or(3),
                seed: params.require("seed", "random-poly")?,
            },
            "random-sym-poly" => BodySpec::RandomSymPoly {
                m: params.take_parsed("m")?,
                slabs: params.take_parsed("slabs")?.unwrap_or(2),
                seed: params.require("seed", "random-sym-poly")?,
            },
            other => {
                return Err(CliError::Config(format!("unknown body family `{}`", other)));
            }
        };
        params.finish(family)?;
        Ok(spec)
    }

    fn own_dim(&self) -> Option<usize> {
        match self {
            BodySpec::Cube { m, .. }
            | BodySpec::Cross { m }
            | BodySpec::Lp { m, .. }
            | BodySpec::Linf { m }
            | BodySpec::RandomPoly { m, .. }
            | BodySpec::RandomSymPoly { m, .. } => *m,
            BodySpec::Hexagon => Some(2),
            BodySpec::Smooth { g, .. } => sphere_function(g).ok().map(|(_, m)| m),
        }
    }

    fn resolve_dim(&self, hint: Option<usize>) -> Result<usize> {
        match (self.own_dim(), hint) {
            (Some(own), Some(h)) if own != h => Err(CliError::Config(format!(
                "body dimension {} does not match the required dimension {}",
                own, h
            ))),
            (Some(own), _) => Ok(own),
            (None, Some(h)) => Ok(h),
            (None, None) => Err(CliError::Config("body dimension unspecified; add m=...".into())),
        }
    }

    pub fn instantiate(&self, hint: Option<usize>) -> Result<Body> {
        let m = self.resolve_dim(hint)?;
        let body = match self {
            BodySpec::Cube { r, .. } => {
                if *r <= 0.0 {
                    return Err(CliError::Config("cube radius must be positive".into()));
                }
                Body::Polytope(cube(m, *r))
            }
            BodySpec::Cross { .. } => Body::Polytope(cross_polytope(m)),
            BodySpec::Hexagon => Body::Polytope(hexagon()),
            BodySpec::Lp { p, .. } => Body::Lp(LpBody::new(m, Exponent::Finite(*p))?),
            BodySpec::Linf { .. } => Body::Lp(LpBody::new(m, Exponent::Infinity)?),
            BodySpec::Smooth { eps, g } => {
                let (g, _) = sphere_function(g)?;
                Body::Smooth(SmoothSupportBody::new(*eps, g)?)
            }
            BodySpec::RandomPoly { extra, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Body::Polytope(random_asymmetric_polytope(m, *extra, &mut rng))
            }
            BodySpec::RandomSymPoly { slabs, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Body::Polytope(random_symmetric_polytope(m, *slabs, &mut rng))
            }
        };
        Ok(body)
    }

    pub fn is_polytope(&self) -> bool {
        matches!(
            self,
            BodySpec::Cube { .. }
                | BodySpec::Cross { .. }
                | BodySpec::Hexagon
                | BodySpec::RandomPoly { .. }
                | BodySpec::RandomSymPoly { .. }
        )
    }

    /// Quadrature used when none is requested: exact facet rules for
    /// polytopes, a dense deterministic sphere rule for smooth bodies.
    /// l_p boundaries have neither, so the caller must choose one.
    pub fn default_quadrature(&self) -> Option<QuadConfig> {
        if self.is_polytope() {
            return Some(QuadConfig::Exact);
        }
        match self {
            BodySpec::Smooth { g, .. } => match sphere_function(g) {
                Ok((_, 2)) => Some(QuadConfig::Angular { nodes: 512 }),
                Ok((_, _)) => Some(QuadConfig::Product { nodes: 16 }),
                Err(_) => None,
            },
            _ => None,
        }
    }
}

/// Named boundary perturbations: `cos2` and `cos4` on the circle, `zonal4`
/// (the degree-4 zonal harmonic) on the 2-sphere.
pub fn sphere_function(name: &str) -> Result<(SphereFunction, usize)> {
    match name {
        "cos2" => Ok((SphereFunction::cos_harmonic(2)?, 2)),
        "cos4" => Ok((SphereFunction::cos_harmonic(4)?, 2)),
        "zonal4" => Ok((SphereFunction::zonal_quartic_m3(), 3)),
        other => Err(CliError::Config(format!(
            "unknown perturbation `{}` (expected cos2, cos4, or zonal4)",
            other
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MatrixSource {
    File { path: String },
    Random { seed: u64 },
}

impl MatrixSource {
    /// Accepts `file:PATH` or `random:seed=N`.
    pub fn parse(text: &str) -> Result<MatrixSource> {
        let (head, rest) = text
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("expected file:PATH or random:seed=N, got `{}`", text)))?;
        match head.trim() {
            "file" => Ok(MatrixSource::File { path: rest.trim().to_string() }),
            "random" => {
                let mut params = Params(split_params(rest)?);
                let seed = params.require("seed", "random matrix")?;
                params.finish("random matrix")?;
                Ok(MatrixSource::Random { seed })
            }
            other => Err(CliError::Config(format!("unknown matrix source `{}`", other))),
        }
    }

    pub fn load(&self, dim_hint: Option<usize>) -> Result<DMatrix<f64>> {
        match self {
            MatrixSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::Io { path: path.clone(), source })?;
                let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| {
                    CliError::Config(format!("{}: expected a JSON array of rows: {}", path, e))
                })?;
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Config(format!("{}: matrix must be square and nonempty", path)));
                }
                if let Some(h) = dim_hint {
                    if h != n {
                        return Err(CliError::Config(format!(
                            "{}: matrix is {}x{} but the experiment needs dimension {}",
                            path, n, n, h
                        )));
                    }
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
            MatrixSource::Random { seed } => {
                let n = dim_hint.ok_or_else(|| {
                    CliError::Config("random matrix needs a dimension; pass --n".into())
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(random_matrix(n, &mut rng))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureConfig {
    Hypersurface,
    Cone,
    AlphaCone { alpha: f64 },
}

impl MeasureConfig {
    /// Accepts `hypersurface`, `cone`, or `alpha:A`.
    pub fn parse(text: &str) -> Result<MeasureConfig> {
        match text.split_once(':') {
            None => match text.trim() {
                "hypersurface" | "hyper" => Ok(MeasureConfig::Hypersurface),
                "cone" => Ok(MeasureConfig::Cone),
                other => Err(CliError::Config(format!("unknown measure `{}`", other))),
            },
            Some(("alpha", a)) => {
                let alpha: f64 = a
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("cannot parse alpha `{}`", a)))?;
                Ok(MeasureConfig::AlphaCone { alpha })
            }
            Some((other, _)) => Err(CliError::Config(format!("unknown measure `{}`", other))),
        }
    }

    pub fn to_measure(&self) -> Result<MeasureSpec> {
        match self {
            MeasureConfig::Hypersurface => Ok(MeasureSpec::hypersurface()),
            MeasureConfig::Cone => Ok(MeasureSpec::cone()),
            MeasureConfig::AlphaCone { alpha } => Ok(MeasureSpec::alpha_cone(*alpha)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum QuadConfig {
    Exact,
    Angular { nodes: usize },
    Product { nodes: usize },
    MonteCarlo { samples: u64 },
}

impl QuadConfig {
    /// Accepts `exact`, `angular:N`, `product:N`, or `mc:N` (N may use
    /// scientific notation, e.g. `mc:1e6`).
    pub fn parse(text: &str) -> Result<QuadConfig> {
        match text.split_once(':') {
            None if text.trim() == "exact" => Ok(QuadConfig::Exact),
            None => Err(CliError::Config(format!("unknown quadrature `{}`", text))),
            Some(("angular", n)) => Ok(QuadConfig::Angular { nodes: parse_count(n)? as usize }),
            Some(("product", n)) => Ok(QuadConfig::Product { nodes: parse_count(n)? as usize }),
            Some(("mc", n)) => Ok(QuadConfig::MonteCarlo { samples: parse_count(n)? }),
            Some((other, _)) => Err(CliError::Config(format!("unknown quadrature `{}`", other))),
        }
    }

    pub fn randomized(&self) -> bool {
        matches!(self, QuadConfig::MonteCarlo { .. })
    }

    pub fn to_boundary_scheme(&self, seed: Option<u64>) -> Result<BoundaryScheme> {
        match self {
            QuadConfig::Exact => Ok(BoundaryScheme::Exact),
            other => Ok(BoundaryScheme::Sphere(other.to_sphere_scheme(seed)?)),
        }
    }

    pub fn to_sphere_scheme(&self, seed: Option<u64>) -> Result<Scheme> {
        match self {
            QuadConfig::Exact => Err(CliError::Config(
                "this experiment integrates over the sphere; use angular, product, or mc".into(),
            )),
            QuadConfig::Angular { nodes } => Ok(Scheme::Angular(*nodes)),
            QuadConfig::Product { nodes } => Ok(Scheme::Product(*nodes)),
            QuadConfig::MonteCarlo { samples } => {
                let seed = seed.ok_or_else(|| {
                    CliError::Config("Monte Carlo quadrature requires --seed".into())
                })?;
                Ok(Scheme::MonteCarlo(*samples as usize, seed))
            }
        }
    }
}

/// Counts accept plain integers or scientific notation (`1e6`).
pub fn parse_count(text: &str) -> Result<u64> {
    let t = text.trim();
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = t
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse count `{}`", t)))?;
    if !f.is_finite() || f < 1.0 || f > 2f64.powi(53) || f.fract() != 0.0 {
        return Err(CliError::Config(format!("count `{}` is not a positive integer", t)));
    }
    Ok(f as u64)
}

/// Comma-separated float list, e.g. `1e-2,1e-3`.
pub fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse number `{}`", s)))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {}", e)))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("config serialize: {}", e)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "config schema {} not supported; this build expects {}",
                self.schema, SCHEMA_VERSION
            )));
        }
        let need = |cond: bool, what: &str| -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(CliError::Config(format!("{} for `{}`", what, self.kind.name())))
            }
        };
        match &self.kind {
            ExperimentKind::Exact { .. } => need(self.matrix.is_some(), "a matrix source is required")?,
            ExperimentKind::ConeAvg { n, k } | ExperimentKind::HyperAvg { n, k } => {
                need(*k >= 1 && *k <= *n, "k must satisfy 1 <= k <= n")?;
                need(self.body.is_some(), "a body is required")?;
                need(self.matrix.is_some(), "a matrix source is required")?;
                need(self.quadrature.is_some(), "a quadrature rule is required")?;
            }
            ExperimentKind::Isotropy => {
                need(self.body.is_some(), "a body is required")?;
                need(self.measure.is_some(), "a measure is required")?;
                need(self.quadrature.is_some(), "a quadrature rule is required")?;
            }
            ExperimentKind::Discrete => {
                need(self.body.is_some(), "a polytope body is required")?;
                need(self.matrix.is_some(), "a matrix source is required")?;
            }
            ExperimentKind::DesignCheck { group, k, all_k, trials } => {
                need(!group.is_empty(), "a group is required")?;
                need(!(*all_k && k.is_some()), "--all-k excludes a single k")?;
                if *trials > 0 {
                    need(self.seed.is_some(), "random trials require a seed")?;
                }
            }
            ExperimentKind::Grassmann { n, k, samples } => {
                need(*k >= 1 && *k <= *n, "k must satisfy 1 <= k <= n")?;
                need(*samples >= 2, "at least 2 samples are required")?;
                need(self.matrix.is_some(), "a matrix source is required")?;
                need(self.seed.is_some(), "a seed is required")?;
            }
            ExperimentKind::Perturb { g, ladder } => {
                sphere_function(g).map(|_| ())?;
                validate_ladder(ladder)?;
                need(self.quadrature.is_some(), "a quadrature rule is required")?;
            }
            ExperimentKind::AlphaScan { g, alphas, ladder } => {
                sphere_function(g).map(|_| ())?;
                validate_ladder(ladder)?;
                need(!alphas.is_empty(), "a nonempty alpha grid is required")?;
                if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
                    return Err(CliError::Config("alpha values must be finite and >= 0".into()));
                }
                need(self.quadrature.is_some(), "a quadrature rule is required")?;
            }
            ExperimentKind::Repro { case } => need(!case.is_empty(), "a case name is required")?,
        }
        if self.quadrature.as_ref().is_some_and(|q| q.randomized()) && self.seed.is_none() {
            return Err(CliError::Config("Monte Carlo quadrature requires a seed".into()));
        }
        Ok(())
    }
}

fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(CliError::Config("the epsilon ladder must be nonempty".into()));
    }
    for w in ladder.windows(2) {
        if w[1] >= w[0] {
            return Err(CliError::Config("the epsilon ladder must be strictly decreasing".into()));
        }
    }
    if ladder.iter().any(|e| !e.is_finite() || *e <= 0.0) {
        return Err(CliError::Config("ladder entries must be positive".into()));
    }
    Ok(())
}
