//! Uninterpreted operational semantics of commands and programs.
//!
//! Stepping generates read, write and update actions without consulting any
//! memory state; read and update actions have an open read-value slot that
//! the memory model binds later. Expression evaluation is left to right and
//! replaces one variable occurrence (the leftmost) per step.

use crate::ast::{Command, Expr, Program, ReadAnn, WriteAnn};
use crate::event::{Action, Tid, Val, VarId};

/// The shape of a thread's next action, with read slots still open.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionTemplate {
    /// `rd(x, _)` or `rd^A(x, _)`; the read value is bound by the memory model.
    Rd { var: VarId, acq: bool },
    /// `wr(x, n)` or `wr^R(x, n)` with a fixed written value.
    Wr { var: VarId, rel: bool, val: Val },
    /// `upd^RA(x, _, n)`: open read slot, fixed written value.
    UpdRA { var: VarId, wrval: Val },
    /// Silent step.
    Tau,
}

impl ActionTemplate {
    /// Bind the open read slot (if any) to `chosen`.
    pub fn bind(&self, chosen: Val) -> Option<Action> {
        match *self {
            ActionTemplate::Rd { var, acq } => Some(Action::Read {
                var,
                val: chosen,
                acq,
            }),
            ActionTemplate::Wr { var, rel, val } => Some(Action::Write { var, val, rel }),
            ActionTemplate::UpdRA { var, wrval } => Some(Action::Update {
                var,
                rdval: chosen,
                wrval,
            }),
            ActionTemplate::Tau => None,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, ActionTemplate::Tau)
    }
}

/// Label of a bound command step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepLabel {
    Tau,
    Act(Action),
}

/// One expression evaluation step: the leftmost variable occurrence of `e`
/// is replaced by `chosen`, emitting the corresponding read action. Returns
/// nothing when `e` is variable-free.
pub fn eval_expr_step(e: &Expr, chosen: Val) -> Option<(Action, Expr)> {
    match e {
        Expr::Literal { .. } => None,
        Expr::VarRead { var, ann, pos } => Some((
            Action::Read {
                var: *var,
                val: chosen,
                acq: *ann == ReadAnn::Acquire,
            },
            Expr::Literal {
                value: chosen,
                pos: *pos,
            },
        )),
        Expr::Unary { op, arg, pos } => {
            let (a, arg2) = eval_expr_step(arg, chosen)?;
            Some((
                a,
                Expr::Unary {
                    op: *op,
                    arg: Box::new(arg2),
                    pos: *pos,
                },
            ))
        }
        Expr::Binary { op, lhs, rhs, pos } => {
            if !lhs.is_variable_free() {
                let (a, lhs2) = eval_expr_step(lhs, chosen)?;
                Some((
                    a,
                    Expr::Binary {
                        op: *op,
                        lhs: Box::new(lhs2),
                        rhs: rhs.clone(),
                        pos: *pos,
                    },
                ))
            } else {
                let (a, rhs2) = eval_expr_step(rhs, chosen)?;
                Some((
                    a,
                    Expr::Binary {
                        op: *op,
                        lhs: lhs.clone(),
                        rhs: Box::new(rhs2),
                        pos: *pos,
                    },
                ))
            }
        }
    }
}

/// One command step with the read slot bound to `chosen` (ignored for
/// writes and silent steps). Returns nothing for skip-like commands.
pub fn command_step(c: &Command, chosen: Val) -> Option<(StepLabel, Command)> {
    match c {
        Command::Skip => None,
        Command::Assign { var, ann, expr, pos } => {
            if expr.is_variable_free() {
                Some((
                    StepLabel::Act(Action::Write {
                        var: *var,
                        val: expr.value(),
                        rel: *ann == WriteAnn::Release,
                    }),
                    Command::Skip,
                ))
            } else {
                let (a, e2) = eval_expr_step(expr, chosen)?;
                Some((
                    StepLabel::Act(a),
                    Command::Assign {
                        var: *var,
                        ann: *ann,
                        expr: e2,
                        pos: *pos,
                    },
                ))
            }
        }
        Command::Swap { var, value, .. } => Some((
            StepLabel::Act(Action::Update {
                var: *var,
                rdval: chosen,
                wrval: *value,
            }),
            Command::Skip,
        )),
        Command::Seq(c1, c2) => {
            if c1.is_skip_like() {
                Some((StepLabel::Tau, (**c2).clone()))
            } else {
                let (l, c1b) = command_step(c1, chosen)?;
                Some((l, Command::Seq(Box::new(c1b), c2.clone())))
            }
        }
        Command::If {
            guard,
            then_branch,
            else_branch,
            pos,
        } => {
            if guard.is_variable_free() {
                let branch = if guard.value() != 0 {
                    then_branch
                } else {
                    else_branch
                };
                Some((StepLabel::Tau, (**branch).clone()))
            } else {
                let (a, g2) = eval_expr_step(guard, chosen)?;
                Some((
                    StepLabel::Act(a),
                    Command::If {
                        guard: g2,
                        then_branch: then_branch.clone(),
                        else_branch: else_branch.clone(),
                        pos: *pos,
                    },
                ))
            }
        }
        Command::While {
            guard,
            partial,
            body,
            pos,
        } => {
            let cur = partial.as_ref().unwrap_or(guard);
            if cur.is_variable_free() {
                if cur.value() != 0 {
                    // Unfold; the next iteration re-evaluates the original
                    // guard, so its reads happen afresh.
                    let reset = Command::While {
                        guard: guard.clone(),
                        partial: None,
                        body: body.clone(),
                        pos: *pos,
                    };
                    Some((
                        StepLabel::Tau,
                        Command::Seq(body.clone(), Box::new(reset)),
                    ))
                } else {
                    Some((StepLabel::Tau, Command::Skip))
                }
            } else {
                let (a, g2) = eval_expr_step(cur, chosen)?;
                Some((
                    StepLabel::Act(a),
                    Command::While {
                        guard: guard.clone(),
                        partial: Some(g2),
                        body: body.clone(),
                        pos: *pos,
                    },
                ))
            }
        }
        Command::Label { name, body, pos } => {
            let (l, b2) = command_step(body, chosen)?;
            let residual = if b2.is_skip_like() {
                b2
            } else {
                Command::Label {
                    name: name.clone(),
                    body: Box::new(b2),
                    pos: *pos,
                }
            };
            Some((l, residual))
        }
    }
}

/// The next action template of a command, if it can step.
pub fn command_template(c: &Command) -> Option<ActionTemplate> {
    let (label, _) = command_step(c, 0)?;
    Some(match label {
        StepLabel::Tau => ActionTemplate::Tau,
        StepLabel::Act(Action::Read { var, acq, .. }) => ActionTemplate::Rd { var, acq },
        StepLabel::Act(Action::Write { var, val, rel }) => ActionTemplate::Wr { var, rel, val },
        StepLabel::Act(Action::Update { var, wrval, .. }) => {
            ActionTemplate::UpdRA { var, wrval }
        }
    })
}

/// One enabled step per non-final thread, with read slots open. The residual
/// program for a given bound value is produced by [`apply_program_step`].
pub fn program_steps(p: &Program) -> Vec<(Tid, ActionTemplate)> {
    p.threads
        .iter()
        .filter_map(|(tid, cmd)| command_template(cmd).map(|t| (*tid, t)))
        .collect()
}

/// Step thread `tid` of `p` with the read slot bound to `chosen`.
pub fn apply_program_step(p: &Program, tid: Tid, chosen: Val) -> Option<(StepLabel, Program)> {
    let cmd = p.threads.get(&tid)?;
    let (label, residual) = command_step(cmd, chosen)?;
    let mut threads = p.threads.clone();
    threads.insert(tid, residual);
    Some((label, Program::new(threads)))
}
