//! Expression-tree encoding of user functionals, loaded from JSON manifests.
//!
//! A manifest specifies dimension, domain box, and one expression for
//! `f(lambda, x)`. Derivatives of manifest families come from the automatic
//! finite-difference fallback.

use super::{DomainBox, FamilyError, FunctionalFamily};
use serde::Deserialize;
use std::sync::Arc;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Const { value: f64 },
    Lambda,
    Coord { index: usize },
    /// Euclidean norm of the whole point.
    Norm,
    /// Dot product of the point with a fixed vector.
    Dot { vector: Vec<f64> },
    Add { args: Vec<Expr> },
    Sub { args: Vec<Expr> },
    Mul { args: Vec<Expr> },
    Div { args: Vec<Expr> },
    Pow { args: Vec<Expr> },
    Sin { args: Vec<Expr> },
    Cos { args: Vec<Expr> },
    Exp { args: Vec<Expr> },
}

impl Expr {
    /// Checks arities and coordinate bounds against the ambient dimension.
    pub fn validate(&self, dim: usize) -> Result<(), FamilyError> {
        let arity = |args: &Vec<Expr>, want: Option<usize>, name: &str| {
            if let Some(w) = want {
                if args.len() != w {
                    return Err(FamilyError::Manifest(format!(
                        "{name} expects {w} argument(s), got {}",
                        args.len()
                    )));
                }
            } else if args.is_empty() {
                return Err(FamilyError::Manifest(format!(
                    "{name} expects at least one argument"
                )));
            }
            for a in args {
                a.validate(dim)?;
            }
            Ok(())
        };
        match self {
            Expr::Const { .. } | Expr::Lambda | Expr::Norm => Ok(()),
            Expr::Coord { index } => {
                if *index >= dim {
                    Err(FamilyError::Manifest(format!(
                        "coordinate index {index} out of range for dimension {dim}"
                    )))
                } else {
                    Ok(())
                }
            }
            Expr::Dot { vector } => {
                if vector.len() != dim {
                    Err(FamilyError::Manifest(format!(
                        "dot vector has length {}, expected {dim}",
                        vector.len()
                    )))
                } else {
                    Ok(())
                }
            }
            Expr::Add { args } | Expr::Mul { args } => arity(args, None, "add/mul"),
            Expr::Sub { args } => arity(args, Some(2), "sub"),
            Expr::Div { args } => arity(args, Some(2), "div"),
            Expr::Pow { args } => arity(args, Some(2), "pow"),
            Expr::Sin { args } => arity(args, Some(1), "sin"),
            Expr::Cos { args } => arity(args, Some(1), "cos"),
            Expr::Exp { args } => arity(args, Some(1), "exp"),
        }
    }

    pub fn eval(&self, lambda: f64, x: &[f64]) -> f64 {
        match self {
            Expr::Const { value } => *value,
            Expr::Lambda => lambda,
            Expr::Coord { index } => x[*index],
            Expr::Norm => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Expr::Dot { vector } => vector.iter().zip(x).map(|(a, b)| a * b).sum(),
            Expr::Add { args } => args.iter().map(|a| a.eval(lambda, x)).sum(),
            Expr::Sub { args } => args[0].eval(lambda, x) - args[1].eval(lambda, x),
            Expr::Mul { args } => args.iter().map(|a| a.eval(lambda, x)).product(),
            Expr::Div { args } => args[0].eval(lambda, x) / args[1].eval(lambda, x),
            Expr::Pow { args } => args[0].eval(lambda, x).powf(args[1].eval(lambda, x)),
            Expr::Sin { args } => args[0].eval(lambda, x).sin(),
            Expr::Cos { args } => args[0].eval(lambda, x).cos(),
            Expr::Exp { args } => args[0].eval(lambda, x).exp(),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct FamilyManifest {
    pub name: String,
    pub dim: usize,
    pub domain_box: DomainBox,
    pub expr: Expr,
}

impl FamilyManifest {
    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        serde_json::from_str(text).map_err(|e| FamilyError::Manifest(e.to_string()))
    }

    pub fn build(self) -> Result<FunctionalFamily, FamilyError> {
        if self.dim == 0 {
            return Err(FamilyError::Manifest("dimension must be positive".into()));
        }
        if self.domain_box.dim() != self.dim
            || self.domain_box.hi.len() != self.dim
            || self
                .domain_box
                .lo
                .iter()
                .zip(&self.domain_box.hi)
                .any(|(lo, hi)| lo >= hi)
        {
            return Err(FamilyError::Manifest(
                "domain box must have matching dimension and lo < hi".into(),
            ));
        }
        self.expr.validate(self.dim)?;
        let expr = Arc::new(self.expr);
        Ok(FunctionalFamily::from_eval(
            self.name,
            self.dim,
            self.domain_box,
            move |lambda, x| expr.eval(lambda, x),
        ))
    }
}

/// Loads a family from a JSON manifest file.
pub fn load_family_manifest(path: &std::path::Path) -> Result<FunctionalFamily, FamilyError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FamilyError::Manifest(format!("{}: {e}", path.display())))?;
    FamilyManifest::from_json(&text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrip() {
        let json = r#"{
            "name": "saddle",
            "dim": 2,
            "domain_box": {"lo": [-2.0, -2.0], "hi": [2.0, 2.0]},
            "expr": {"op": "sub", "args": [
                {"op": "mul", "args": [{"op": "coord", "index": 0}, {"op": "coord", "index": 0}]},
                {"op": "mul", "args": [{"op": "coord", "index": 1}, {"op": "coord", "index": 1}]}
            ]}
        }"#;
        let fam = FamilyManifest::from_json(json).unwrap().build().unwrap();
        assert_eq!(fam.dim(), 2);
        assert!((fam.eval(0.0, &[1.5, 0.5]) - 2.0).abs() < 1e-14);
        // finite-difference gradient installed automatically
        let g = fam.grad(0.0, &[1.0, 1.0]);
        assert!((g[0] - 2.0).abs() < 1e-6);
        assert!((g[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn manifest_with_lambda_and_norm() {
        let json = r#"{
            "name": "scaled-bowl",
            "dim": 3,
            "domain_box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]},
            "expr": {"op": "mul", "args": [
                {"op": "lambda"},
                {"op": "pow", "args": [{"op": "norm"}, {"op": "const", "value": 2.0}]}
            ]}
        }"#;
        let fam = FamilyManifest::from_json(json).unwrap().build().unwrap();
        assert!((fam.eval(2.0, &[1.0, 0.0, 0.0]) - 2.0).abs() < 1e-14);
        assert!((fam.lambda_grad(0.5, &[0.0, 1.0, 0.0]) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn manifest_rejects_bad_coord() {
        let json = r#"{
            "name": "bad",
            "dim": 2,
            "domain_box": {"lo": [-1, -1], "hi": [1, 1]},
            "expr": {"op": "coord", "index": 5}
        }"#;
        assert!(FamilyManifest::from_json(json).unwrap().build().is_err());
    }

    #[test]
    fn manifest_rejects_bad_arity() {
        let json = r#"{
            "name": "bad",
            "dim": 1,
            "domain_box": {"lo": [-1], "hi": [1]},
            "expr": {"op": "div", "args": [{"op": "lambda"}]}
        }"#;
        assert!(FamilyManifest::from_json(json).unwrap().build().is_err());
    }
}
