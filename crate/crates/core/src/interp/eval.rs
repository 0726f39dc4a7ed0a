use std::rc::Rc;

use super::hooks::{Caller, EnterEvent, ExecutionHooks, ThreadId};
use super::value::Value;
use super::{ErrorKind, RuntimeError, TestOutcome, TestStatus};
use crate::lang::ast::*;

/// Default step budget per test execution.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Maximum number of nested application frames before `StackOverflow`.
pub const MAX_CALL_DEPTH: usize = 200;

enum Flow {
    Normal,
    Return(Value),
}

/// Tree-walking evaluator for one program.
///
/// An optional body override replaces one function's body for the whole run;
/// this is how mutants execute without rewriting source text.
pub struct Interpreter<'p, H> {
    program: &'p Program,
    body_override: Option<(usize, &'p Block)>,
    hooks: H,
    step_budget: u64,
    steps: u64,
    depth: usize,
    next_thread: u32,
}

struct Frame {
    owner: Caller,
    thread: ThreadId,
    locals: Vec<Value>,
}

impl<'p, H: ExecutionHooks> Interpreter<'p, H> {
    pub fn new(program: &'p Program, hooks: H) -> Self {
        Interpreter {
            program,
            body_override: None,
            hooks,
            step_budget: DEFAULT_STEP_BUDGET,
            steps: 0,
            depth: 0,
            next_thread: 1,
        }
    }

    pub fn with_override(mut self, function: usize, body: &'p Block) -> Self {
        self.body_override = Some((function, body));
        self
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn hooks(&self) -> &H {
        &self.hooks
    }

    pub fn into_hooks(self) -> H {
        self.hooks
    }

    /// Runs one test case to completion. Failures are data, not errors.
    pub fn run_test(&mut self, test: usize) -> TestOutcome {
        let def = &self.program.tests[test];
        self.steps = 0;
        self.depth = 0;
        self.next_thread = 1;
        self.hooks.test_start(test);
        let mut frame = Frame { owner: Caller::Test, thread: ThreadId::MAIN, locals: vec![Value::Unit; def.frame_size] };
        let result = self.exec_block(&def.body, &mut frame);
        self.hooks.test_end(test);
        let error = result.err();
        TestOutcome {
            test_id: def.name.clone(),
            status: if error.is_some() { TestStatus::Fail } else { TestStatus::Pass },
            error,
        }
    }

    fn error(&self, kind: ErrorKind, frame: &Frame, message: impl Into<String>) -> RuntimeError {
        let method_id = match frame.owner {
            Caller::Test => None,
            Caller::Method(idx) => Some(self.program.functions[idx].name.clone()),
        };
        RuntimeError { kind, message: message.into(), method_id }
    }

    fn tick(&mut self, frame: &Frame) -> Result<(), RuntimeError> {
        self.steps += 1;
        if self.steps > self.step_budget {
            return Err(self.error(
                ErrorKind::Timeout,
                frame,
                format!("step budget of {} exceeded", self.step_budget),
            ));
        }
        Ok(())
    }

    fn exec_block(&mut self, block: &Block, frame: &mut Frame) -> Result<Flow, RuntimeError> {
        for stmt in &block.stmts {
            if let Flow::Return(v) = self.exec_stmt(stmt, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn condition(&mut self, cond: &Expr, frame: &mut Frame) -> Result<bool, RuntimeError> {
        match self.eval(cond, frame)? {
            Value::Bool(b) => Ok(b),
            other => Err(self.operand_error(frame, "condition", &other)),
        }
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> Result<Flow, RuntimeError> {
        self.tick(frame)?;
        if let Caller::Method(m) = frame.owner {
            self.hooks.statement(m, stmt.index);
        }
        match &stmt.kind {
            StmtKind::Let { slot, value, .. } | StmtKind::Assign { slot, value, .. } => {
                let v = self.eval(value, frame)?;
                frame.locals[*slot] = v;
            }
            StmtKind::If { cond, then, otherwise, branch } => {
                let taken = self.condition(cond, frame)?;
                if let Caller::Method(m) = frame.owner {
                    self.hooks.branch(m, *branch, taken);
                }
                if taken {
                    return self.exec_block(then, frame);
                } else if let Some(other) = otherwise {
                    return self.exec_block(other, frame);
                }
            }
            StmtKind::While { cond, body, branch } => loop {
                let taken = self.condition(cond, frame)?;
                if let Caller::Method(m) = frame.owner {
                    self.hooks.branch(m, *branch, taken);
                }
                if !taken {
                    break;
                }
                if let Flow::Return(v) = self.exec_block(body, frame)? {
                    return Ok(Flow::Return(v));
                }
                self.tick(frame)?;
            },
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Unit,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Assert(e) => {
                let v = self.eval(e, frame)?;
                if !matches!(v, Value::Bool(true)) {
                    return Err(self.error(
                        ErrorKind::AssertionError,
                        frame,
                        format!("assertion `{}` failed (value {v})", crate::lang::printer::expr_to_string(e)),
                    ));
                }
            }
            StmtKind::Spawn(call) => {
                let Callee::Function(target) = call.target else {
                    unreachable!("checker guarantees spawn targets are functions")
                };
                let args = self.eval_args(&call.args, frame)?;
                let child = ThreadId(self.next_thread);
                self.next_thread += 1;
                self.hooks.thread_start(child, frame.thread);
                let result = self.invoke(target, args, frame.owner, child, true);
                self.hooks.thread_end(child);
                result?;
            }
            StmtKind::Call(call) => {
                self.call(call, frame)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn eval_args(&mut self, args: &[Expr], frame: &mut Frame) -> Result<Vec<Value>, RuntimeError> {
        args.iter().map(|a| self.eval(a, frame)).collect()
    }

    fn call(&mut self, call: &Call, frame: &mut Frame) -> Result<Value, RuntimeError> {
        let args = self.eval_args(&call.args, frame)?;
        match call.target {
            Callee::Function(idx) => self.invoke(idx, args, frame.owner, frame.thread, false),
            Callee::Builtin(b) => self.builtin(b, args, frame),
            Callee::Unresolved => unreachable!("checked programs have no unresolved calls"),
        }
    }

    fn invoke(
        &mut self,
        function: usize,
        args: Vec<Value>,
        caller: Caller,
        thread: ThreadId,
        spawned: bool,
    ) -> Result<Value, RuntimeError> {
        let def = &self.program.functions[function];
        let body = match self.body_override {
            Some((idx, body)) if idx == function => body,
            _ => &def.body,
        };
        let mut locals = args;
        locals.resize(def.frame_size.max(def.params.len()), Value::Unit);
        let mut frame = Frame { owner: Caller::Method(function), thread, locals };

        if self.depth >= MAX_CALL_DEPTH {
            return Err(self.error(
                ErrorKind::StackOverflow,
                &frame,
                format!("call depth limit of {MAX_CALL_DEPTH} exceeded"),
            ));
        }
        self.depth += 1;
        self.hooks.enter(EnterEvent { method: function, caller, thread, spawned });
        let result = self.exec_block(body, &mut frame);
        self.hooks.exit(function, thread);
        self.depth -= 1;

        match result? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Unit),
        }
    }

    fn operand_error(&self, frame: &Frame, what: &str, v: &Value) -> RuntimeError {
        if matches!(v, Value::Null) {
            self.error(ErrorKind::NullRefError, frame, format!("null used as {what}"))
        } else {
            self.error(ErrorKind::ArithmeticError, frame, format!("{} value used as {what}", v.type_name()))
        }
    }

    fn builtin(&mut self, builtin: Builtin, args: Vec<Value>, frame: &Frame) -> Result<Value, RuntimeError> {
        let mut args = args.into_iter();
        let mut next = || args.next().expect("arity checked statically");
        match builtin {
            Builtin::Len => match next() {
                Value::Arr(items) => Ok(Value::Int(items.len() as i64)),
                other => Err(self.operand_error(frame, "argument of len", &other)),
            },
            Builtin::Get => {
                let (arr, idx) = (next(), next());
                let items = match arr {
                    Value::Arr(items) => items,
                    other => return Err(self.operand_error(frame, "argument of get", &other)),
                };
                let i = match idx {
                    Value::Int(i) => i,
                    other => return Err(self.operand_error(frame, "index", &other)),
                };
                usize::try_from(i)
                    .ok()
                    .and_then(|i| items.get(i).cloned())
                    .ok_or_else(|| {
                        self.error(
                            ErrorKind::IndexError,
                            frame,
                            format!("index {i} out of bounds for length {}", items.len()),
                        )
                    })
            }
            Builtin::Deref => match next() {
                Value::Ref(inner) => Ok((*inner).clone()),
                other => Err(self.operand_error(frame, "argument of deref", &other)),
            },
            Builtin::StrCat => match (next(), next()) {
                (Value::Str(a), Value::Str(b)) => Ok(Value::Str(Rc::from(format!("{a}{b}")))),
                (Value::Str(_), other) | (other, _) => Err(self.operand_error(frame, "argument of str_cat", &other)),
            },
        }
    }

    fn eval(&mut self, expr: &Expr, frame: &mut Frame) -> Result<Value, RuntimeError> {
        Ok(match &expr.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Float(v) => Value::Float(*v),
            ExprKind::Str(s) => Value::Str(Rc::from(s.as_str())),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Null => Value::Null,
            ExprKind::Array(items) => {
                let values = self.eval_args(items, frame)?;
                Value::Arr(Rc::from(values))
            }
            ExprKind::Box(inner) => Value::Ref(Rc::new(self.eval(inner, frame)?)),
            ExprKind::Var { slot, .. } => frame.locals[*slot].clone(),
            ExprKind::Call(call) => self.call(call, frame)?,
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand, frame)?;
                match (op, v) {
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnOp::Neg, Value::Int(i)) => Value::Int(
                        i.checked_neg()
                            .ok_or_else(|| self.error(ErrorKind::ArithmeticError, frame, "integer overflow in negation"))?,
                    ),
                    (UnOp::Neg, Value::Float(f)) => Value::Float(-f),
                    (_, other) => return Err(self.operand_error(frame, "unary operand", &other)),
                }
            }
            ExprKind::Binary { op: BinOp::And, lhs, rhs } => {
                match self.eval(lhs, frame)? {
                    Value::Bool(false) => Value::Bool(false),
                    Value::Bool(true) => match self.eval(rhs, frame)? {
                        Value::Bool(b) => Value::Bool(b),
                        other => return Err(self.operand_error(frame, "operand of &&", &other)),
                    },
                    other => return Err(self.operand_error(frame, "operand of &&", &other)),
                }
            }
            ExprKind::Binary { op: BinOp::Or, lhs, rhs } => {
                match self.eval(lhs, frame)? {
                    Value::Bool(true) => Value::Bool(true),
                    Value::Bool(false) => match self.eval(rhs, frame)? {
                        Value::Bool(b) => Value::Bool(b),
                        other => return Err(self.operand_error(frame, "operand of ||", &other)),
                    },
                    other => return Err(self.operand_error(frame, "operand of ||", &other)),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, frame)?;
                let r = self.eval(rhs, frame)?;
                self.binary(*op, l, r, frame)?
            }
        })
    }

    fn binary(&self, op: BinOp, l: Value, r: Value, frame: &Frame) -> Result<Value, RuntimeError> {
        use Value::{Float, Int};
        match op {
            BinOp::Eq => return Ok(Value::Bool(l == r)),
            BinOp::Ne => return Ok(Value::Bool(l != r)),
            _ => {}
        }
        let overflow = || self.error(ErrorKind::ArithmeticError, frame, format!("integer overflow in `{}`", op.symbol()));
        match (&l, &r) {
            (Int(a), Int(b)) => {
                let (a, b) = (*a, *b);
                Ok(match op {
                    BinOp::Add => Int(a.checked_add(b).ok_or_else(overflow)?),
                    BinOp::Sub => Int(a.checked_sub(b).ok_or_else(overflow)?),
                    BinOp::Mul => Int(a.checked_mul(b).ok_or_else(overflow)?),
                    BinOp::Div | BinOp::Rem if b == 0 => {
                        return Err(self.error(ErrorKind::ArithmeticError, frame, "integer division by zero"))
                    }
                    BinOp::Div => Int(a.checked_div(b).ok_or_else(overflow)?),
                    BinOp::Rem => Int(a.checked_rem(b).ok_or_else(overflow)?),
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                })
            }
            (Int(_) | Float(_), Int(_) | Float(_)) => {
                let as_f = |v: &Value| match v {
                    Int(i) => *i as f64,
                    Float(f) => *f,
                    _ => unreachable!(),
                };
                let (a, b) = (as_f(&l), as_f(&r));
                Ok(match op {
                    BinOp::Add => Float(a + b),
                    BinOp::Sub => Float(a - b),
                    BinOp::Mul => Float(a * b),
                    BinOp::Div => Float(a / b),
                    BinOp::Rem => Float(a % b),
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                })
            }
            (Int(_) | Float(_), other) | (other, _) => {
                Err(self.operand_error(frame, &format!("operand of `{}`", op.symbol()), other))
            }
        }
    }
}
