//! Reverse-mode automatic differentiation over a flat operation tape.
//!
//! Operations are recorded in evaluation order, so parents always precede
//! children and a single reverse sweep yields exact gradients. Two usage
//! styles share the same tape:
//!
//! - define-by-run: create variables with values ([`Tape::var`], [`Tape::leaf`]),
//!   every recorded op is evaluated on the spot, then call [`Tape::backward`];
//! - deferred: declare [`Tape::input`] placeholders, build the graph, then
//!   evaluate it with [`Tape::forward_eval`] under a set of named bindings.
//!
//! Matrix products are recorded as one `Dot` node per output entry, which keeps
//! the per-node cost proportional to the inner dimension.
//!
//! ```
//! use graybox::tape::Tape;
//!
//! let tape = Tape::new();
//! let x = tape.var("x", 3.0);
//! let y = x * x;
//! let grads = tape.backward(y).unwrap();
//! assert_eq!(y.value(), 9.0);
//! assert_eq!(grads.wrt(x), 6.0);
//! ```

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Arguments of `asin` closer than this to ±1 are rejected.
pub const ASIN_GUARD: f64 = 1.0 - 1e-9;

/// Public view of the kind of a recorded node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Sin,
    Cos,
    Arcsin,
    Sqrt,
    Relu,
    Square,
    Sum,
    MatMul,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Constant,
    Variable,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Sin(u32),
    Cos(u32),
    Arcsin(u32),
    Sqrt(u32),
    Relu(u32),
    Square(u32),
    // operands live in `links[start..start + len]`
    Sum { start: u32, len: u32 },
    // one entry of a matrix product: pairs in `links[start..start + 2 * len]`
    Dot { start: u32, len: u32 },
}

impl Op {
    fn kind(&self) -> OpKind {
        match self {
            Op::Constant => OpKind::Constant,
            Op::Variable => OpKind::Variable,
            Op::Add(..) => OpKind::Add,
            Op::Sub(..) => OpKind::Sub,
            Op::Mul(..) => OpKind::Mul,
            Op::Div(..) => OpKind::Div,
            Op::Neg(_) => OpKind::Neg,
            Op::Sin(_) => OpKind::Sin,
            Op::Cos(_) => OpKind::Cos,
            Op::Arcsin(_) => OpKind::Arcsin,
            Op::Sqrt(_) => OpKind::Sqrt,
            Op::Relu(_) => OpKind::Relu,
            Op::Square(_) => OpKind::Square,
            Op::Sum { .. } => OpKind::Sum,
            Op::Dot { .. } => OpKind::MatMul,
        }
    }
}

#[derive(Debug)]
struct Input {
    node: u32,
    name: Option<String>,
    bound: bool,
}

#[derive(Debug, Default)]
struct Inner {
    ops: Vec<Op>,
    values: Vec<f64>,
    links: Vec<u32>,
    inputs: Vec<Input>,
    // false while some input is unbound or after a failed evaluation
    evaluated: bool,
    fault: Option<Error>,
}

/// A recording of scalar operations. Single-owner; use one tape per thread.
#[derive(Debug)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var(#{} = {})", self.idx, self.value())
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

fn domain_check(op: &Op, values: &[f64]) -> Option<Error> {
    match *op {
        Op::Arcsin(a) => {
            let x = values[a as usize];
            (x.abs() > ASIN_GUARD)
                .then(|| Error::Domain(format!("arcsin argument {x} outside (-1, 1)")))
        }
        Op::Div(_, b) => {
            (values[b as usize] == 0.0).then(|| Error::Domain("division by zero".into()))
        }
        Op::Sqrt(a) => {
            let x = values[a as usize];
            (x < 0.0).then(|| Error::Domain(format!("sqrt of negative argument {x}")))
        }
        _ => None,
    }
}

fn primal(op: &Op, values: &[f64], links: &[u32], own: f64) -> f64 {
    let v = |i: u32| values[i as usize];
    match *op {
        Op::Constant | Op::Variable => own,
        Op::Add(a, b) => v(a) + v(b),
        Op::Sub(a, b) => v(a) - v(b),
        Op::Mul(a, b) => v(a) * v(b),
        Op::Div(a, b) => v(a) / v(b),
        Op::Neg(a) => -v(a),
        Op::Sin(a) => v(a).sin(),
        Op::Cos(a) => v(a).cos(),
        Op::Arcsin(a) => v(a).asin(),
        Op::Sqrt(a) => v(a).sqrt(),
        Op::Relu(a) => v(a).max(0.0),
        Op::Square(a) => v(a) * v(a),
        Op::Sum { start, len } => links[start as usize..(start + len) as usize]
            .iter()
            .map(|&i| v(i))
            .sum(),
        Op::Dot { start, len } => links[start as usize..(start + 2 * len) as usize]
            .chunks_exact(2)
            .map(|p| v(p[0]) * v(p[1]))
            .sum(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            inner: RefCell::new(Inner {
                evaluated: true,
                ..Inner::default()
            }),
        }
    }

    /// Drops all nodes but keeps the allocations.
    pub fn clear(&mut self) {
        let inner = self.inner.get_mut();
        inner.ops.clear();
        inner.values.clear();
        inner.links.clear();
        inner.inputs.clear();
        inner.evaluated = true;
        inner.fault = None;
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self, v: Var<'_>) -> OpKind {
        self.inner.borrow().ops[v.idx as usize].kind()
    }

    fn push(&self, op: Op) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let value = primal(&op, &inner.values, &inner.links, 0.0);
        if inner.evaluated && inner.fault.is_none() {
            if let Some(err) = domain_check(&op, &inner.values) {
                inner.fault = Some(err);
            }
        }
        let idx = inner.ops.len() as u32;
        inner.ops.push(op);
        inner.values.push(value);
        Var { tape: self, idx }
    }

    fn push_leaf(&self, op: Op, value: f64, name: Option<String>, bound: bool) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let idx = inner.ops.len() as u32;
        inner.ops.push(op);
        inner.values.push(value);
        if matches!(op, Op::Variable) {
            inner.inputs.push(Input {
                node: idx,
                name,
                bound,
            });
        }
        if !bound {
            inner.evaluated = false;
        }
        Var { tape: self, idx }
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push_leaf(Op::Constant, value, None, true)
    }

    /// Named variable bound to `value`.
    pub fn var(&self, name: &str, value: f64) -> Var<'_> {
        self.push_leaf(Op::Variable, value, Some(name.to_string()), true)
    }

    /// Anonymous variable bound to `value`; gradients are read via [`Gradients::wrt`].
    pub fn leaf(&self, value: f64) -> Var<'_> {
        self.push_leaf(Op::Variable, value, None, true)
    }

    /// Named placeholder without a value; the tape must be evaluated with
    /// [`Tape::forward_eval`] before differentiation.
    pub fn input(&self, name: &str) -> Var<'_> {
        self.push_leaf(Op::Variable, f64::NAN, Some(name.to_string()), false)
    }

    pub fn sum(&self, terms: &[Var<'_>]) -> Var<'_> {
        if terms.is_empty() {
            return self.constant(0.0);
        }
        let start = {
            let mut inner = self.inner.borrow_mut();
            let start = inner.links.len() as u32;
            inner.links.extend(terms.iter().map(|t| t.idx));
            start
        };
        self.push(Op::Sum {
            start,
            len: terms.len() as u32,
        })
    }

    /// Inner product of two equally long slices, recorded as a single node.
    pub fn dot(&self, a: &[Var<'_>], b: &[Var<'_>]) -> Result<Var<'_>> {
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch(format!(
                "dot of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(self.dot_unchecked(a, b))
    }

    fn dot_unchecked(&self, a: &[Var<'_>], b: &[Var<'_>]) -> Var<'_> {
        if a.is_empty() {
            return self.constant(0.0);
        }
        let start = {
            let mut inner = self.inner.borrow_mut();
            let start = inner.links.len() as u32;
            for (x, y) in a.iter().zip(b) {
                inner.links.push(x.idx);
                inner.links.push(y.idx);
            }
            start
        };
        self.push(Op::Dot {
            start,
            len: a.len() as u32,
        })
    }

    /// Dense product of a row-major `rows x inner` matrix with a row-major
    /// `inner x cols` matrix; returns the row-major `rows x cols` result.
    pub fn matmul<'t>(
        &'t self,
        a: &[Var<'t>],
        b: &[Var<'t>],
        rows: usize,
        inner: usize,
        cols: usize,
    ) -> Result<Vec<Var<'t>>> {
        if a.len() != rows * inner || b.len() != inner * cols {
            return Err(Error::ShapeMismatch(format!(
                "matmul {}x{} by {}x{} with {} and {} entries",
                rows,
                inner,
                inner,
                cols,
                a.len(),
                b.len()
            )));
        }
        let mut out = Vec::with_capacity(rows * cols);
        let mut column = Vec::with_capacity(inner);
        for r in 0..rows {
            let row = &a[r * inner..(r + 1) * inner];
            for c in 0..cols {
                column.clear();
                column.extend((0..inner).map(|k| b[k * cols + c]));
                out.push(self.dot_unchecked(row, &column));
            }
        }
        Ok(out)
    }

    /// First domain violation seen while recording, if any.
    pub fn check(&self) -> Result<()> {
        match &self.inner.borrow().fault {
            None => Ok(()),
            Some(e) => Err(clone_error(e)),
        }
    }

    /// Re-evaluates the whole graph with named bindings and returns the
    /// values of `outputs`. Named inputs missing from `bindings` keep their
    /// bound value, or fail with `UnboundVariable` if they never had one.
    pub fn forward_eval(
        &self,
        bindings: &HashMap<String, f64>,
        outputs: &[Var<'_>],
    ) -> Result<Vec<f64>> {
        let mut guard = self.inner.borrow_mut();
        let inner = &mut *guard;
        inner.evaluated = false;
        inner.fault = None;
        for input in inner.inputs.iter_mut() {
            match input.name.as_ref().and_then(|n| bindings.get(n)) {
                Some(&value) => {
                    inner.values[input.node as usize] = value;
                    input.bound = true;
                }
                None if input.bound => {}
                None => {
                    return Err(Error::UnboundVariable(
                        input.name.clone().unwrap_or_default(),
                    ))
                }
            }
        }
        for i in 0..inner.ops.len() {
            let op = inner.ops[i];
            if matches!(op, Op::Constant | Op::Variable) {
                continue;
            }
            if let Some(err) = domain_check(&op, &inner.values) {
                return Err(err);
            }
            inner.values[i] = primal(&op, &inner.values, &inner.links, 0.0);
        }
        inner.evaluated = true;
        Ok(outputs.iter().map(|o| inner.values[o.idx as usize]).collect())
    }

    pub fn value(&self, v: Var<'_>) -> f64 {
        self.inner.borrow().values[v.idx as usize]
    }

    pub fn backward(&self, output: Var<'_>) -> Result<Gradients> {
        self.backward_seeded(output, 1.0)
    }

    /// Reverse sweep from `output` with adjoint `seed`.
    pub fn backward_seeded(&self, output: Var<'_>, seed: f64) -> Result<Gradients> {
        let inner = self.inner.borrow();
        if !inner.evaluated {
            return Err(Error::NotEvaluated);
        }
        if let Some(e) = &inner.fault {
            return Err(clone_error(e));
        }
        let out = output.idx as usize;
        if !inner.values[out].is_finite() {
            return Err(Error::NonFiniteValue(format!(
                "output node #{out} = {}",
                inner.values[out]
            )));
        }
        let values = &inner.values;
        let links = &inner.links;
        let mut adj = vec![0.0; out + 1];
        adj[out] = seed;
        for i in (0..=out).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            let v = |k: u32| values[k as usize];
            match inner.ops[i] {
                Op::Constant | Op::Variable => {}
                Op::Add(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] += g;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] -= g;
                }
                Op::Mul(a, b) => {
                    adj[a as usize] += g * v(b);
                    adj[b as usize] += g * v(a);
                }
                Op::Div(a, b) => {
                    let y = v(b);
                    adj[a as usize] += g / y;
                    adj[b as usize] -= g * values[i] / y;
                }
                Op::Neg(a) => adj[a as usize] -= g,
                Op::Sin(a) => adj[a as usize] += g * v(a).cos(),
                Op::Cos(a) => adj[a as usize] -= g * v(a).sin(),
                Op::Arcsin(a) => {
                    let x = v(a);
                    adj[a as usize] += g / (1.0 - x * x).sqrt();
                }
                Op::Sqrt(a) => adj[a as usize] += g * 0.5 / values[i],
                // subgradient 0 at the kink
                Op::Relu(a) => {
                    if v(a) > 0.0 {
                        adj[a as usize] += g;
                    }
                }
                Op::Square(a) => adj[a as usize] += 2.0 * g * v(a),
                Op::Sum { start, len } => {
                    for &k in &links[start as usize..(start + len) as usize] {
                        adj[k as usize] += g;
                    }
                }
                Op::Dot { start, len } => {
                    for p in links[start as usize..(start + 2 * len) as usize].chunks_exact(2) {
                        adj[p[0] as usize] += g * v(p[1]);
                        adj[p[1] as usize] += g * v(p[0]);
                    }
                }
            }
        }
        for (i, a) in adj.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::NonFiniteValue(format!("adjoint of node #{i}")));
            }
        }
        let names = inner
            .inputs
            .iter()
            .filter(|inp| (inp.node as usize) <= out)
            .filter_map(|inp| inp.name.clone().map(|n| (n, inp.node)))
            .collect();
        Ok(Gradients { adjoints: adj, names })
    }
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(m.clone()),
        other => Error::NonFiniteValue(other.to_string()),
    }
}

/// Adjoints of every node up to the differentiated output.
#[derive(Debug, Clone)]
pub struct Gradients {
    adjoints: Vec<f64>,
    names: Vec<(String, u32)>,
}

impl Gradients {
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        self.adjoints.get(v.idx as usize).copied().unwrap_or(0.0)
    }

    pub fn by_name(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, i)| self.adjoints[i as usize])
    }

    pub fn named(&self) -> HashMap<String, f64> {
        self.names
            .iter()
            .map(|(n, i)| (n.clone(), self.adjoints[*i as usize]))
            .collect()
    }
}

impl<'t> Var<'t> {
    pub fn value(self) -> f64 {
        self.tape.value(self)
    }

    pub fn tape(self) -> &'t Tape {
        self.tape
    }

    pub fn sin(self) -> Var<'t> {
        self.tape.push(Op::Sin(self.idx))
    }

    pub fn cos(self) -> Var<'t> {
        self.tape.push(Op::Cos(self.idx))
    }

    pub fn asin(self) -> Var<'t> {
        self.tape.push(Op::Arcsin(self.idx))
    }

    pub fn sqrt(self) -> Var<'t> {
        self.tape.push(Op::Sqrt(self.idx))
    }

    pub fn relu(self) -> Var<'t> {
        self.tape.push(Op::Relu(self.idx))
    }

    pub fn square(self) -> Var<'t> {
        self.tape.push(Op::Square(self.idx))
    }

    fn lift(self, c: f64) -> Var<'t> {
        self.tape.constant(c)
    }
}

macro_rules! binary {
    ($trait:ident, $method:ident, $op:ident) => {
        impl<'t> $trait for Var<'t> {
            type Output = Var<'t>;
            fn $method(self, rhs: Var<'t>) -> Var<'t> {
                debug_assert!(std::ptr::eq(self.tape, rhs.tape));
                self.tape.push(Op::$op(self.idx, rhs.idx))
            }
        }
        impl<'t> $trait<f64> for Var<'t> {
            type Output = Var<'t>;
            fn $method(self, rhs: f64) -> Var<'t> {
                let c = self.lift(rhs);
                self.tape.push(Op::$op(self.idx, c.idx))
            }
        }
        impl<'t> $trait<Var<'t>> for f64 {
            type Output = Var<'t>;
            fn $method(self, rhs: Var<'t>) -> Var<'t> {
                let c = rhs.lift(self);
                rhs.tape.push(Op::$op(c.idx, rhs.idx))
            }
        }
    };
}

binary!(Add, add, Add);
binary!(Sub, sub, Sub);
binary!(Mul, mul, Mul);
binary!(Div, div, Div);

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.tape.push(Op::Neg(self.idx))
    }
}

/// Outcome of comparing tape gradients with central differences.
#[derive(Debug, Clone)]
pub struct GradientReport {
    pub gradient: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// max_i |ad_i - fd_i| / max(1, |ad_i|)
    pub max_relative_error: f64,
}

/// Compares the tape gradient of `f` at `point` with central differences of
/// step `eps` in every coordinate.
pub fn check_gradient<F>(f: F, point: &[f64], eps: f64) -> Result<GradientReport>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>>,
{
    let eval = |x: &[f64]| -> Result<f64> {
        let tape = Tape::new();
        let vars: Vec<_> = x.iter().map(|&v| tape.leaf(v)).collect();
        let out = f(&tape, &vars)?;
        tape.check()?;
        let y = out.value();
        if !y.is_finite() {
            return Err(Error::NonFiniteValue(format!("f({x:?}) = {y}")));
        }
        Ok(y)
    };
    let tape = Tape::new();
    let vars: Vec<_> = point.iter().map(|&v| tape.leaf(v)).collect();
    let out = f(&tape, &vars)?;
    let grads = tape.backward(out)?;
    let gradient: Vec<f64> = vars.iter().map(|&v| grads.wrt(v)).collect();

    let mut finite_difference = Vec::with_capacity(point.len());
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        probe[i] = point[i] + eps;
        let up = eval(&probe)?;
        probe[i] = point[i] - eps;
        let down = eval(&probe)?;
        probe[i] = point[i];
        finite_difference.push((up - down) / (2.0 * eps));
    }
    let max_relative_error = gradient
        .iter()
        .zip(&finite_difference)
        .map(|(a, d)| (a - d).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(GradientReport {
        gradient,
        finite_difference,
        max_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_value_and_slope() {
        let tape = Tape::new();
        let x = tape.var("x", 3.0);
        let y = x.square();
        assert_eq!(y.value(), 9.0);
        assert_eq!(tape.backward(y).unwrap().by_name("x"), Some(6.0));
    }

    #[test]
    fn product_partials() {
        let tape = Tape::new();
        let x = tape.var("x", 2.0);
        let y = tape.var("y", 5.0);
        let g = tape.backward(x * y).unwrap();
        assert_eq!(g.wrt(x), 5.0);
        assert_eq!(g.wrt(y), 2.0);
    }

    #[test]
    fn relu_slopes() {
        for (x0, slope) in [(-1.0, 0.0), (2.0, 1.0), (0.0, 0.0)] {
            let tape = Tape::new();
            let x = tape.leaf(x0);
            let g = tape.backward(x.relu()).unwrap();
            assert_eq!(g.wrt(x), slope, "at {x0}");
        }
    }

    #[test]
    fn sin_at_zero() {
        let tape = Tape::new();
        let x = tape.input("x");
        let y = x.sin();
        let out = tape
            .forward_eval(&HashMap::from([("x".to_string(), 0.0)]), &[y])
            .unwrap();
        assert_eq!(out, vec![0.0]);
    }

    #[test]
    fn arcsin_out_of_range_is_domain_error() {
        let tape = Tape::new();
        let x = tape.input("x");
        let y = x.asin();
        let err = tape
            .forward_eval(&HashMap::from([("x".to_string(), 1.5)]), &[y])
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));

        let tape = Tape::new();
        let x = tape.leaf(1.0 - 1e-10);
        let y = x.asin();
        assert!(matches!(tape.backward(y), Err(Error::Domain(_))));
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let tape = Tape::new();
        let x = tape.leaf(1.0);
        let z = tape.leaf(0.0);
        let y = x / z;
        assert!(matches!(tape.check(), Err(Error::Domain(_))));
        assert!(tape.backward(y).is_err());
    }

    #[test]
    fn unbound_and_unevaluated() {
        let tape = Tape::new();
        let x = tape.input("x");
        let y = x * 2.0;
        assert!(matches!(tape.backward(y), Err(Error::NotEvaluated)));
        let err = tape.forward_eval(&HashMap::new(), &[y]).unwrap_err();
        assert!(matches!(err, Error::UnboundVariable(n) if n == "x"));
        tape.forward_eval(&HashMap::from([("x".to_string(), 4.0)]), &[y])
            .unwrap();
        assert_eq!(tape.backward(y).unwrap().wrt(x), 2.0);
    }

    #[test]
    fn nan_output_is_an_error() {
        let tape = Tape::new();
        let x = tape.leaf(f64::NAN);
        assert!(matches!(
            tape.backward(x * 2.0),
            Err(Error::NonFiniteValue(_))
        ));
    }

    #[test]
    fn cube_against_central_difference() {
        let report = check_gradient(|_, x| Ok(x[0] * x[0] * x[0]), &[2.0], 1e-5).unwrap();
        assert!(report.max_relative_error < 1e-6, "{report:?}");
    }

    #[test]
    fn linear_function_is_exact() {
        let report = check_gradient(
            |_, x| Ok(x[0] * 3.0 - x[1] * 0.5 + 7.0),
            &[0.3, -1.2],
            1e-3,
        )
        .unwrap();
        assert!(report.max_relative_error < 1e-10, "{report:?}");
    }

    #[test]
    fn seed_scales_linearly() {
        let tape = Tape::new();
        let x = tape.leaf(0.7);
        let y = tape.leaf(-1.3);
        let f = (x * y).sin() + x.square() / (y * y + 1.0);
        let g1 = tape.backward_seeded(f, 1.0).unwrap();
        let g2 = tape.backward_seeded(f, 2.0).unwrap();
        assert_eq!(g2.wrt(x), 2.0 * g1.wrt(x));
        assert_eq!(g2.wrt(y), 2.0 * g1.wrt(y));
    }

    #[test]
    fn matmul_matches_manual_product() {
        let tape = Tape::new();
        let a: Vec<_> = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
            .iter()
            .map(|&v| tape.leaf(v))
            .collect();
        let b: Vec<_> = [7.0, 8.0, 9.0].iter().map(|&v| tape.leaf(v)).collect();
        let c = tape.matmul(&a, &b, 2, 3, 1).unwrap();
        assert_eq!(c[0].value(), 50.0);
        assert_eq!(c[1].value(), 122.0);
        assert_eq!(tape.kind(c[0]), OpKind::MatMul);
        let total = tape.sum(&c);
        let g = tape.backward(total).unwrap();
        assert_eq!(g.wrt(a[4]), 8.0);
        assert_eq!(g.wrt(b[0]), 5.0);
        assert!(tape.matmul(&a, &b, 3, 3, 1).is_err());
    }

    #[test]
    fn forward_eval_is_deterministic() {
        let tape = Tape::new();
        let x = tape.input("x");
        let y = (x.sin() * x.cos() + x.square().sqrt()) / (x + 3.0);
        let b = HashMap::from([("x".to_string(), 0.4321)]);
        let first = tape.forward_eval(&b, &[y]).unwrap();
        let second = tape.forward_eval(&b, &[y]).unwrap();
        assert_eq!(first[0].to_bits(), second[0].to_bits());
    }
}
