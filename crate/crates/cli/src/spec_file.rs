//! JSON description of an ODE: coefficient expressions per power of ε.

use std::fmt;

use resurgo::algebra::parse::{parse_coeff_list, parse_ratfunc, ExprError};
use resurgo::algebra::RatFunc;
use resurgo::perturbative::ODESpec;
use serde::{Deserialize, Serialize};

/// An expression string or an ascending coefficient list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expr {
    Text(String),
    Coeffs(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub order: usize,
    /// `coeffs[i]` multiplies `εⁱ y⁽ⁱ⁾`.
    pub coeffs: Vec<Expr>,
    /// `forcing[k]` is the coefficient of `εᵏ` on the right-hand side.
    #[serde(default)]
    pub forcing: Vec<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
}

/// A problem in a spec document, located by 1-based line and column.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SpecError {}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

/// Finds JSON string literals in document order after a key, so expression
/// errors can be reported at their position in the file.
struct Locator<'a> {
    src: &'a str,
    cursor: usize,
}

impl<'a> Locator<'a> {
    fn after_key(src: &'a str, key: &str) -> Self {
        let cursor = src.find(&format!("\"{key}\"")).map_or(0, |k| k + key.len() + 2);
        Locator { src, cursor }
    }

    /// Position of `column` (1-based) inside the next occurrence of `text`.
    fn locate(&mut self, text: &str, column: usize) -> (usize, usize) {
        let lit = serde_json::to_string(text).unwrap_or_default();
        match self.src[self.cursor..].find(&lit) {
            Some(k) => {
                let start = self.cursor + k;
                self.cursor = start + lit.len();
                let inner = start + 1 + text.chars().take(column.saturating_sub(1)).map(char::len_utf8).sum::<usize>();
                line_col(self.src, inner)
            }
            None => line_col(self.src, self.cursor),
        }
    }
}

impl SpecFile {
    pub fn parse(src: &str) -> Result<SpecFile, SpecError> {
        serde_json::from_str(src).map_err(|e| SpecError { line: e.line(), column: e.column(), message: e.to_string() })
    }

    fn convert(expr: &Expr, loc: &mut Locator) -> Result<RatFunc, SpecError> {
        let fail = |loc: &mut Locator, text: &str, e: ExprError| {
            let (line, column) = loc.locate(text, e.column);
            SpecError { line, column, message: format!("in '{text}': {}", e.message) }
        };
        match expr {
            Expr::Text(s) => parse_ratfunc(s).map_err(|e| fail(loc, s, e)),
            Expr::Coeffs(items) => {
                for item in items {
                    if let Err(e) = parse_ratfunc(item).and_then(|r| match r.as_constant() {
                        Some(_) => Ok(()),
                        None => Err(ExprError { column: 1, message: "not a constant".into() }),
                    }) {
                        return Err(fail(loc, item, e));
                    }
                    loc.locate(item, 1);
                }
                let p = parse_coeff_list(items).map_err(|e| SpecError { line: 0, column: 0, message: e.message })?;
                Ok(RatFunc::from_poly(p))
            }
        }
    }

    /// Builds the ODE; `src` is the document text used to locate errors.
    pub fn to_spec(&self, src: &str) -> Result<ODESpec, SpecError> {
        let mut loc = Locator::after_key(src, "coeffs");
        let coeffs = self.coeffs.iter().map(|e| Self::convert(e, &mut loc)).collect::<Result<Vec<_>, _>>()?;
        let mut loc = Locator::after_key(src, "forcing");
        let forcing = self.forcing.iter().map(|e| Self::convert(e, &mut loc)).collect::<Result<Vec<_>, _>>()?;
        let at_key = |key: &str, message: String| {
            let (line, column) = src.find(&format!("\"{key}\"")).map_or((1, 1), |k| line_col(src, k));
            SpecError { line, column, message }
        };
        if self.coeffs.len() != self.order + 1 {
            return Err(at_key("order", format!("order {} needs {} coefficients, found {}", self.order, self.order + 1, self.coeffs.len())));
        }
        if let Some(p) = self.precision_bits {
            if p < 64 {
                return Err(at_key("precision_bits", format!("precision {p} is below 64 bits")));
            }
        }
        ODESpec::new(coeffs, forcing).map_err(|e| at_key("coeffs", e.to_string()))
    }

    /// Serializable form of `spec` with exact rational strings.
    pub fn from_spec(spec: &ODESpec, precision_bits: Option<u32>, series_order: Option<usize>) -> SpecFile {
        SpecFile {
            schema: Some(resurgo::SCHEMA.into()),
            order: spec.order(),
            coeffs: spec.coeffs.iter().map(|c| Expr::Text(c.to_string())).collect(),
            forcing: spec.forcing.iter().map(|c| Expr::Text(c.to_string())).collect(),
            precision_bits,
            series_order,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
