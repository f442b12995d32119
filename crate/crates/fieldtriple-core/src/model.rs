//! Field model declarations: a fibration in adapted coordinates together
//! with a Lagrangian density coefficient, optional per-fiber sources, an
//! optional Hamiltonian coefficient, and declared parameters.
//!
//! Models are usually loaded from a JSON file; see [`ModelFile`] for the
//! schema. A canonical serialization is provided so that reports can carry a
//! stable model digest and so that printing and re-parsing a model is the
//! identity.

use std::collections::BTreeMap;
use std::path::Path;

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::charts::{Chart, ChartError, ChartSet};
use crate::expr::{normalize, Expr, ExprError, Symbol};
use crate::parse::{parse_expr, ParseError, SymbolScope};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("model file i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Chart(#[from] ChartError),
    #[error("in `{field}`: {err}")]
    Parse { field: String, err: ParseError },
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("`sources` must list one expression per fiber ({expected} expected, {got} given)")]
    SourceCount { expected: usize, got: usize },
    #[error("parameter `{0}` is not a valid name")]
    BadParameterName(String),
    #[error("parameter value `{value}` for `{name}` is not an exact rational")]
    BadParameterValue { name: String, value: String },
    #[error("source_sign must be +1 or -1, got {0}")]
    BadSourceSign(i64),
    #[error("expression `{field}` mentions `{symbol}`, which is outside its chart scope")]
    OutOfScope { field: String, symbol: String },
    #[error("the model declares no sources")]
    MissingSources,
    #[error("the model declares no hamiltonian")]
    MissingHamiltonian,
}

/// Sign convention for the source term in the divergence law. The default
/// (+1) reproduces the Poisson equation of the built-in electrostatics
/// model; -1 is the opposite bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceSign {
    Plus,
    Minus,
}

impl SourceSign {
    pub fn factor(self) -> Expr {
        match self {
            SourceSign::Plus => Expr::one(),
            SourceSign::Minus => Expr::int(-1),
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            SourceSign::Plus => 1,
            SourceSign::Minus => -1,
        }
    }
}

/// A fibration declaration plus the densities defining the theory.
#[derive(Debug, Clone)]
pub struct FieldModel {
    base_names: Vec<String>,
    fiber_names: Vec<String>,
    charts: ChartSet,
    parameters: BTreeMap<Symbol, Option<BigRational>>,
    lagrangian: Expr,
    sources: Option<Vec<Expr>>,
    hamiltonian: Option<Expr>,
    source_sign: SourceSign,
}

impl PartialEq for FieldModel {
    fn eq(&self, other: &Self) -> bool {
        self.base_names == other.base_names
            && self.fiber_names == other.fiber_names
            && self.parameters == other.parameters
            && self.lagrangian == other.lagrangian
            && self.sources == other.sources
            && self.hamiltonian == other.hamiltonian
            && self.source_sign == other.source_sign
    }
}

impl FieldModel {
    /// Validate and assemble a model from expression text.
    #[allow(clippy::too_many_arguments)]
    pub fn from_texts(
        base_names: &[String],
        fiber_names: &[String],
        parameters: &BTreeMap<String, Option<BigRational>>,
        lagrangian: &str,
        sources: Option<&[String]>,
        hamiltonian: Option<&str>,
        source_sign: SourceSign,
    ) -> Result<FieldModel, ModelError> {
        let charts = ChartSet::build(base_names, fiber_names)?;

        let mut param_syms: BTreeMap<Symbol, Option<BigRational>> = BTreeMap::new();
        for (name, value) in parameters {
            if !is_valid_param_name(name, &charts) {
                return Err(ModelError::BadParameterName(name.clone()));
            }
            param_syms.insert(Symbol::new(name), value.clone());
        }

        let mut scope_j1e = SymbolScope::from_symbols(charts.symbol_set(Chart::J1E));
        scope_j1e.extend(param_syms.keys().cloned());
        let lag = parse_field(lagrangian, &scope_j1e, "lagrangian")?;

        let sources = match sources {
            None => None,
            Some(texts) => {
                if texts.len() != fiber_names.len() {
                    return Err(ModelError::SourceCount {
                        expected: fiber_names.len(),
                        got: texts.len(),
                    });
                }
                let mut scope_e = SymbolScope::from_symbols(charts.symbol_set(Chart::E));
                scope_e.extend(param_syms.keys().cloned());
                let mut out = Vec::with_capacity(texts.len());
                for (a, text) in texts.iter().enumerate() {
                    out.push(parse_field(text, &scope_e, &format!("sources[{a}]"))?);
                }
                Some(out)
            }
        };

        let hamiltonian = match hamiltonian {
            None => None,
            Some(text) => {
                let mut scope_p = SymbolScope::from_symbols(charts.symbol_set(Chart::P));
                scope_p.extend(param_syms.keys().cloned());
                Some(parse_field(text, &scope_p, "hamiltonian")?)
            }
        };

        Ok(FieldModel {
            base_names: base_names.to_vec(),
            fiber_names: fiber_names.to_vec(),
            charts,
            parameters: param_syms,
            lagrangian: lag,
            sources,
            hamiltonian,
            source_sign,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.charts.base_dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.charts.fiber_dim()
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber_names
    }

    pub fn charts(&self) -> &ChartSet {
        &self.charts
    }

    pub fn parameters(&self) -> &BTreeMap<Symbol, Option<BigRational>> {
        &self.parameters
    }

    /// The Lagrangian density coefficient, normalized, over first-jet symbols.
    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn sources(&self) -> Option<&[Expr]> {
        self.sources.as_deref()
    }

    pub fn hamiltonian(&self) -> Option<&Expr> {
        self.hamiltonian.as_ref()
    }

    pub fn source_sign(&self) -> SourceSign {
        self.source_sign
    }

    /// The source term entering fiber `a`'s divergence law with the pinned
    /// sign, or zero when the model has no sources or sources are disabled.
    pub fn signed_source(&self, a: usize, with_sources: bool) -> Expr {
        if !with_sources {
            return Expr::zero();
        }
        match &self.sources {
            None => Expr::zero(),
            Some(rho) => self.source_sign.factor() * rho[a].clone(),
        }
    }

    /// Canonical file form: expressions printed from their normal forms.
    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            base: self.base_names.clone(),
            fibers: self.fiber_names.clone(),
            parameters: self
                .parameters
                .iter()
                .map(|(s, v)| {
                    (
                        s.name().to_string(),
                        v.as_ref().map(|r| r.to_string()),
                    )
                })
                .collect(),
            lagrangian: self.lagrangian.to_string(),
            sources: self
                .sources
                .as_ref()
                .map(|rho| rho.iter().map(|e| e.to_string()).collect()),
            hamiltonian: self.hamiltonian.as_ref().map(|h| h.to_string()),
            source_sign: match self.source_sign {
                SourceSign::Plus => None,
                SourceSign::Minus => Some(-1),
            },
        }
    }

    /// Byte-stable canonical JSON of the model.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_model_file()).expect("model serializes")
    }
}

fn is_valid_param_name(name: &str, charts: &ChartSet) -> bool {
    let mut chars = name.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic());
    let rest_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !(head_ok && rest_ok) || crate::expr::FuncTag::from_name(name).is_some() {
        return false;
    }
    // parameters must not shadow any chart coordinate
    !Chart::ALL
        .iter()
        .any(|c| charts.symbols(*c).iter().any(|s| s.name() == name))
}

fn parse_field(text: &str, scope: &SymbolScope, field: &str) -> Result<Expr, ModelError> {
    let e = parse_expr(text, scope).map_err(|err| ModelError::Parse {
        field: field.to_string(),
        err,
    })?;
    Ok(normalize(&e)?)
}

/// JSON schema of a model file. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub base: Vec<String>,
    pub fibers: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, Option<String>>,
    pub lagrangian: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_sign: Option<i64>,
}

impl ModelFile {
    pub fn into_model(self) -> Result<FieldModel, ModelError> {
        let mut params: BTreeMap<String, Option<BigRational>> = BTreeMap::new();
        for (name, value) in &self.parameters {
            let parsed = match value {
                None => None,
                Some(text) => Some(parse_rational(text).ok_or_else(|| {
                    ModelError::BadParameterValue {
                        name: name.clone(),
                        value: text.clone(),
                    }
                })?),
            };
            params.insert(name.clone(), parsed);
        }
        let sign = match self.source_sign {
            None | Some(1) => SourceSign::Plus,
            Some(-1) => SourceSign::Minus,
            Some(v) => return Err(ModelError::BadSourceSign(v)),
        };
        FieldModel::from_texts(
            &self.base,
            &self.fibers,
            &params,
            &self.lagrangian,
            self.sources.as_deref(),
            self.hamiltonian.as_deref(),
            sign,
        )
    }
}

/// Exact rational from `p/q`, integer, or decimal-fraction text.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_mag = whole.trim_start_matches(['-', '+']);
        if !whole_mag.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{whole_mag}{frac}");
        let numer: BigInt = digits.parse().ok()?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        let r = BigRational::new(numer, denom);
        return Some(if negative { -r } else { r });
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from(n))
}

/// Load and validate a model from a JSON file.
pub fn parse_model(path: impl AsRef<Path>) -> Result<FieldModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    parse_model_str(&text)
}

/// Same as [`parse_model`], from in-memory text.
pub fn parse_model_str(text: &str) -> Result<FieldModel, ModelError> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model()
}

/// Names of the built-in example models.
pub const BUILTIN_NAMES: [&str; 4] = ["electrostatics3d", "wave2d", "oscillator1d", "laplace2d"];

/// Canonical JSON text of a built-in model.
pub fn builtin_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "electrostatics3d" => {
            r#"{
  "base": ["x1", "x2", "x3"],
  "fibers": ["y1"],
  "parameters": { "rho": null },
  "lagrangian": "(y1_1^2 + y1_2^2 + y1_3^2)/2",
  "sources": ["rho"]
}
"#
        }
        "wave2d" => {
            r#"{
  "base": ["x1", "x2"],
  "fibers": ["y1"],
  "lagrangian": "(y1_1^2 - y1_2^2)/2"
}
"#
        }
        "oscillator1d" => {
            r#"{
  "base": ["x1"],
  "fibers": ["y1"],
  "lagrangian": "y1_1^2/2 - y1^2/2"
}
"#
        }
        "laplace2d" => {
            r#"{
  "base": ["x1", "x2"],
  "fibers": ["y1"],
  "lagrangian": "(y1_1^2 + y1_2^2)/2"
}
"#
        }
        _ => return None,
    })
}

/// A built-in model by name.
pub fn builtin(name: &str) -> Option<FieldModel> {
    let json = builtin_json(name)?;
    Some(parse_model_str(json).expect("built-in models are valid"))
}
