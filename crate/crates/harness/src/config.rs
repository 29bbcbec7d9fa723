//! Experiment configuration files (TOML).
//!
//! ```toml
//! name = "poisson2d-dirichlet"
//! equation = "poisson"          # or "biharmonic"
//! dim = 2
//! domain = [[-1.0, 1.0], [-1.0, 1.0]]
//! n = [16, 32, 64, 128]
//! forcing = "-100*x*sin(20*pi*x^2*y)*cos(4*pi*(x+y))"
//!
//! [tau]
//! scheme = "dihedral"           # clockwise | eastwest (2D only)
//!
//! [reference]
//! mode = "self-converge"        # or manufactured / eigen-exact
//! n_ref = 160
//!
//! [[bc]]
//! face = "x-low"
//! kind = "dirichlet"            # neumann | normal (poly) | derivative (order)
//! g = "0"
//! ```
//!
//! Boundary conditions attach to their axis in the order they appear.

use std::path::Path;

use gentau::operators::face_name;
use gentau::{BoundaryOperator, CornerScheme, Equation, InteriorTest, Side, TauFamily, TauSpec};
use serde::Deserialize;
use thiserror::Error;

use crate::expr::{Expr, ParseError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("expression in `{field}`: {source}")]
    Expression { field: String, source: ParseError },
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawEquation {
    Poisson,
    Biharmonic,
}

#[derive(Debug, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum RawTest {
    #[default]
    Ultraspherical,
    Collocation,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTau {
    scheme: Option<String>,
    /// Interior tau family index (defaults to the equation order).
    alpha: Option<u32>,
    #[serde(default)]
    naive: bool,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
enum RawReference {
    SelfConverge { n_ref: usize },
    Manufactured { solution: String },
    EigenExact { formula: String, modes: Option<usize> },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<String>,
    svg: Option<String>,
    snapshot: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBc {
    face: String,
    kind: String,
    poly: Option<Vec<f64>>,
    order: Option<usize>,
    #[serde(default = "zero")]
    g: String,
}

fn zero() -> String {
    "0".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    equation: RawEquation,
    dim: usize,
    domain: Vec<[f64; 2]>,
    n: Vec<usize>,
    #[serde(default = "zero")]
    forcing: String,
    #[serde(default)]
    gauge: bool,
    #[serde(default)]
    test: RawTest,
    #[serde(default)]
    tau: RawTau,
    reference: RawReference,
    #[serde(default)]
    output: RawOutput,
    bc: Vec<RawBc>,
}

/// Closed-form spectra available to eigen-exact references.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenFormula {
    /// `π⁴ ((m/Lx)² + (n/Ly)²)²`, `m, n ≥ 1`.
    SimplySupportedPlate,
}

impl EigenFormula {
    pub fn parse(id: &str) -> Option<Self> {
        match id {
            "simply-supported-plate" => Some(EigenFormula::SimplySupportedPlate),
            _ => None,
        }
    }

    /// The `count` smallest exact eigenvalues (with multiplicity).
    pub fn lowest(self, domain: &[(f64, f64)], count: usize) -> Vec<f64> {
        match self {
            EigenFormula::SimplySupportedPlate => {
                let (lx, ly) = (domain[0].1 - domain[0].0, domain[1].1 - domain[1].0);
                let top = count + 1;
                let pi4 = std::f64::consts::PI.powi(4);
                let mut all: Vec<f64> = (1..=top)
                    .flat_map(|m| (1..=top).map(move |n| pi4 * ((m as f64 / lx).powi(2) + (n as f64 / ly).powi(2)).powi(2)))
                    .collect();
                all.sort_by(f64::total_cmp);
                all.truncate(count);
                all
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Reference {
    SelfConverge { n_ref: usize },
    Manufactured(Expr),
    EigenExact { formula: EigenFormula, modes: usize },
}

/// One boundary condition: operator and data expression.
#[derive(Debug, Clone)]
pub struct BoundaryEntry {
    pub operator: BoundaryOperator,
    pub g: Expr,
}

#[derive(Debug, Clone, Default)]
pub struct OutputPaths {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub snapshot: Option<String>,
}

/// Tau options as configured (resolved against the equation order by
/// [`ExperimentConfig::tau_spec`]).
#[derive(Debug, Clone, PartialEq)]
pub struct TauOptions {
    pub scheme: CornerScheme,
    pub alpha: Option<u32>,
    pub naive: bool,
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub scheme: Option<CornerScheme>,
    pub alpha: Option<u32>,
    pub naive: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub equation: Equation,
    pub domain: Vec<(f64, f64)>,
    pub n: Vec<usize>,
    pub forcing: Expr,
    pub gauge: bool,
    pub test: InteriorTest,
    pub tau: TauOptions,
    pub reference: Reference,
    pub output: OutputPaths,
    /// Per axis, in file order.
    pub bcs: Vec<Vec<BoundaryEntry>>,
}

pub fn parse_scheme(name: &str) -> Option<CornerScheme> {
    match name {
        "dihedral" => Some(CornerScheme::Dihedral),
        "clockwise" => Some(CornerScheme::Clockwise),
        "eastwest" | "east-west" => Some(CornerScheme::EastWest),
        _ => None,
    }
}

fn parse_face(face: &str, dim: usize) -> Result<(usize, Side), ConfigError> {
    let (axis, side) = face.split_once('-').ok_or_else(|| ConfigError::Invalid(format!("face `{face}` is not `<axis>-<low|high>`")))?;
    let axis = match axis {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        _ => return invalid(format!("unknown axis in face `{face}`")),
    };
    if axis >= dim {
        return invalid(format!("face `{face}` does not exist in {dim}D"));
    }
    let side = match side {
        "low" => Side::Low,
        "high" => Side::High,
        _ => return invalid(format!("unknown side in face `{face}`")),
    };
    Ok((axis, side))
}

fn expression(field: &str, text: &str, dim: usize) -> Result<Expr, ConfigError> {
    let e = Expr::parse(text).map_err(|source| ConfigError::Expression { field: field.into(), source })?;
    if e.arity() > dim {
        return invalid(format!("`{field}` uses a coordinate beyond {dim}D"));
    }
    Ok(e)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let dim = raw.dim;
        if !(1..=3).contains(&dim) {
            return invalid(format!("dim must be 1, 2 or 3, got {dim}"));
        }
        let equation = match raw.equation {
            RawEquation::Poisson => Equation::Poisson,
            RawEquation::Biharmonic => Equation::Biharmonic,
        };
        let b = equation.order();
        let domain: Vec<(f64, f64)> = match raw.domain.len() {
            1 => vec![(raw.domain[0][0], raw.domain[0][1]); dim],
            k if k == dim => raw.domain.iter().map(|iv| (iv[0], iv[1])).collect(),
            k => return invalid(format!("{k} domain intervals for {dim} axes")),
        };
        if domain.iter().any(|(a, c)| !(a < c) || !a.is_finite() || !c.is_finite()) {
            return invalid("domain intervals must be finite with low < high");
        }
        if raw.n.is_empty() || raw.n.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("`n` must be a non-empty, strictly increasing list");
        }
        if raw.n[0] <= b {
            return invalid(format!("every N must exceed the equation order {b}"));
        }
        let reference = match raw.reference {
            RawReference::SelfConverge { n_ref } => {
                if n_ref <= *raw.n.last().unwrap() {
                    return invalid("n_ref must exceed every N in the sweep");
                }
                Reference::SelfConverge { n_ref }
            }
            RawReference::Manufactured { solution } => Reference::Manufactured(expression("reference.solution", &solution, dim)?),
            RawReference::EigenExact { formula, modes } => {
                let formula = EigenFormula::parse(&formula).ok_or_else(|| ConfigError::Invalid(format!("unknown eigenvalue formula `{formula}`")))?;
                if dim != 2 || equation != Equation::Biharmonic {
                    return invalid("simply-supported-plate spectra need a 2D biharmonic problem");
                }
                Reference::EigenExact { formula, modes: modes.unwrap_or(10) }
            }
        };
        let scheme = match raw.tau.scheme.as_deref() {
            None => CornerScheme::Dihedral,
            Some(s) => parse_scheme(s).ok_or_else(|| ConfigError::Invalid(format!("unknown corner scheme `{s}`")))?,
        };

        let mut bcs: Vec<Vec<BoundaryEntry>> = vec![Vec::new(); dim];
        for (k, bc) in raw.bc.iter().enumerate() {
            let (axis, side) = parse_face(&bc.face, dim)?;
            let face = face_name(axis, side);
            let operator = match bc.kind.as_str() {
                "dirichlet" => BoundaryOperator::dirichlet(axis, side),
                "neumann" => BoundaryOperator::neumann(axis, side),
                "normal" => {
                    let poly = bc.poly.clone().ok_or_else(|| ConfigError::Invalid(format!("bc {k} ({face}): kind `normal` needs `poly`")))?;
                    BoundaryOperator::new(axis, side, poly.clone(), format!("normal{poly:?}[{face}]"))
                        .map_err(|e| ConfigError::Invalid(format!("bc {k} ({face}): {e}")))?
                }
                "derivative" => {
                    let order = bc.order.ok_or_else(|| ConfigError::Invalid(format!("bc {k} ({face}): kind `derivative` needs `order`")))?;
                    BoundaryOperator::axis_derivative(axis, side, order)
                }
                other => return invalid(format!("bc {k} ({face}): unknown kind `{other}`")),
            };
            if operator.order() >= b {
                return invalid(format!("bc {k} ({face}): derivative order {} must be below {b}", operator.order()));
            }
            if bcs[axis].iter().any(|e| e.operator.side() == side && e.operator.normal_poly() == operator.normal_poly()) {
                return invalid(format!("bc {k} ({face}): repeats a condition already imposed on this face"));
            }
            bcs[axis].push(BoundaryEntry { operator, g: expression(&format!("bc[{k}].g"), &bc.g, dim)? });
        }
        for (axis, list) in bcs.iter().enumerate() {
            if list.len() != b {
                return invalid(format!("axis {axis} has {} boundary conditions, the equation needs {b}", list.len()));
            }
        }
        let pure_neumann = equation == Equation::Poisson && bcs.iter().flatten().all(|e| e.operator.normal_poly()[0] == 0.0);
        if raw.gauge && !pure_neumann {
            return invalid("a gauge condition only applies to pure-Neumann Poisson problems");
        }

        Ok(ExperimentConfig {
            name: raw.name,
            equation,
            domain,
            n: raw.n,
            forcing: expression("forcing", &raw.forcing, dim)?,
            gauge: raw.gauge,
            test: match raw.test {
                RawTest::Ultraspherical => InteriorTest::Ultraspherical,
                RawTest::Collocation => InteriorTest::Collocation,
            },
            tau: TauOptions { scheme, alpha: raw.tau.alpha, naive: raw.tau.naive },
            reference,
            output: OutputPaths { csv: raw.output.csv, svg: raw.output.svg, snapshot: raw.output.snapshot },
            bcs,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn tau_spec(&self) -> TauSpec {
        let b = self.equation.order();
        let mut spec = TauSpec::standard(b).with_scheme(self.tau.scheme.clone());
        if let Some(alpha) = self.tau.alpha {
            spec = spec.with_interior(TauFamily::ultraspherical(alpha));
        }
        if self.tau.naive {
            spec = spec.naive();
        }
        spec
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(n) = o.n {
            if n <= self.equation.order() {
                return invalid(format!("N = {n} must exceed the equation order {}", self.equation.order()));
            }
            if let Reference::SelfConverge { n_ref } = self.reference {
                if n >= n_ref {
                    return invalid(format!("N = {n} must be below n_ref = {n_ref}"));
                }
            }
            self.n = vec![n];
        }
        if let Some(scheme) = &o.scheme {
            self.tau.scheme = scheme.clone();
        }
        if let Some(alpha) = o.alpha {
            self.tau.alpha = Some(alpha);
        }
        self.tau.naive |= o.naive;
        Ok(())
    }
}

/// The configs shipped with the harness, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("poisson2d-dirichlet", include_str!("../configs/poisson2d-dirichlet.toml")),
    ("poisson2d-neumann", include_str!("../configs/poisson2d-neumann.toml")),
    ("poisson2d-robin", include_str!("../configs/poisson2d-robin.toml")),
    ("biharmonic3d", include_str!("../configs/biharmonic3d.toml")),
    ("biharmonic2d-eig", include_str!("../configs/biharmonic2d-eig.toml")),
];

pub fn bundled(name: &str) -> Option<ExperimentConfig> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| ExperimentConfig::from_toml(text).expect("bundled configs are valid"))
}

/// A path on disk, or else the name of a bundled config.
pub fn resolve(arg: &str) -> Result<ExperimentConfig, ConfigError> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentConfig::load(path);
    }
    let stem = arg.trim_end_matches(".toml");
    if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == stem) {
        return ExperimentConfig::from_toml(text);
    }
    ExperimentConfig::load(path)
}
