//! Kernels given as `evalexpr` expressions in `x`, `y` and `t = x − y`.

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value};
use onesided_core::{CausalKernel, Direction};

struct Point {
    x: Value<DefaultNumericTypes>,
    y: Value<DefaultNumericTypes>,
    t: Value<DefaultNumericTypes>,
}

impl Context for Point {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        match identifier {
            "x" => Some(&self.x),
            "y" => Some(&self.y),
            "t" => Some(&self.t),
            _ => None,
        }
    }

    fn call_function(
        &self,
        identifier: &str,
        _argument: &Value<DefaultNumericTypes>,
    ) -> EvalexprResult<Value<DefaultNumericTypes>, DefaultNumericTypes> {
        Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string()))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(&mut self, _disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Ok(())
    }
}

/// A compiled expression kernel. Off the support side of `direction` it is
/// zero whatever the expression says; a failed evaluation yields NaN, which
/// discretization rejects.
#[derive(Debug)]
pub struct ExprKernel {
    source: String,
    tree: Node<DefaultNumericTypes>,
    constant: f64,
    epsilon: f64,
    direction: Direction,
}

impl ExprKernel {
    pub fn parse(source: &str, constant: f64, epsilon: f64, direction: Direction) -> Result<Self, String> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source).map_err(|e| e.to_string())?;
        if let Some(v) = tree.iter_variable_identifiers().find(|v| !matches!(*v, "x" | "y" | "t")) {
            return Err(format!("unknown variable `{v}`; kernels may use x, y and t"));
        }
        Ok(Self { source: source.to_string(), tree, constant, epsilon, direction })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl CausalKernel for ExprKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        if !self.direction.admits(x, y) {
            return 0.0;
        }
        let ctx = Point { x: Value::Float(x), y: Value::Float(y), t: Value::Float(x - y) };
        self.tree.eval_number_with_context(&ctx).unwrap_or(f64::NAN)
    }

    fn constant(&self) -> f64 {
        self.constant
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn direction(&self) -> Direction {
        self.direction
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use onesided_core::operators::CausalHilbert;

    #[test]
    fn matches_builtin_hilbert() {
        let k = ExprKernel::parse("1 / t", 4.0, 1.0, Direction::Up).unwrap();
        for (x, y) in [(0.5, 0.25), (0.9, 0.1), (0.2, 0.7)] {
            assert_eq!(k.eval(x, y), CausalHilbert.eval(x, y));
        }
    }

    #[test]
    fn builtins_and_errors() {
        let k = ExprKernel::parse("math::sin(math::ln(t)) / t", 24.0, 1.0, Direction::Up).unwrap();
        let t: f64 = 0.3;
        assert!((k.eval(0.4, 0.1) - t.ln().sin() / t).abs() < 1e-12);
        assert!(ExprKernel::parse("1 / (x - z)", 1.0, 1.0, Direction::Up).is_err());
        assert!(ExprKernel::parse("1 / (", 1.0, 1.0, Direction::Up).is_err());
        let bad = ExprKernel::parse("true", 1.0, 1.0, Direction::Up).unwrap();
        assert!(bad.eval(1.0, 0.0).is_nan());
    }
}
