//! Cross-cutting generation policies: the per-statement variable usage gate,
//! the modifier placeholder gate, optimization-trigger payload builders, and
//! the post-hoc undefined-behavior screen.

use crate::ast::*;
use crate::context::GenContext;
use crate::validate::{walk_expr, walk_exprs_of, walk_stmts, walk_yul, Violation};
use std::collections::BTreeMap;

/// Per-statement usage state of a variable. `UsedIncDec` is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UsageState {
    #[default]
    Unused,
    UsedPlain,
    UsedIncDec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsageRequest {
    Plain,
    IncDec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    AllowPlain,
    AllowIncDec,
    SubstituteConstant,
}

/// Decides whether a candidate variable occurrence may be used as requested
/// within the current statement, and returns the successor state.
///
/// A variable that has participated in an increment/decrement may not appear
/// again; a variable already used plainly may keep being used plainly but may
/// not be promoted to an increment/decrement (the combination would be
/// evaluation-order dependent).
pub fn usage_gate(state: UsageState, request: UsageRequest) -> (GateDecision, UsageState) {
    use GateDecision::*;
    use UsageState::*;
    match (state, request) {
        (Unused, UsageRequest::Plain) => (AllowPlain, UsedPlain),
        (UsedPlain, UsageRequest::Plain) => (AllowPlain, UsedPlain),
        (Unused, UsageRequest::IncDec) => (AllowIncDec, UsedIncDec),
        (UsedPlain, UsageRequest::IncDec) => (SubstituteConstant, UsedPlain),
        (UsedIncDec, _) => (SubstituteConstant, UsedIncDec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceholderDecision {
    EmitPlaceholder,
    Redraw,
}

/// Placeholder counter gate: the first draw emits, every later draw redraws.
pub fn placeholder_gate(counter: u64) -> PlaceholderDecision {
    if counter == 0 {
        PlaceholderDecision::EmitPlaceholder
    } else {
        PlaceholderDecision::Redraw
    }
}

/// One optimization-trigger payload, ready to splice into a Yul block.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPayload {
    pub kind: PayloadKind,
    pub stmts: Vec<YulStmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    KeccakPair,
    StorageWriteReturn,
    YulSolvarRef,
    SelectorAccess,
}

/// Emits memory priming plus two keccak256 calls over the same base address.
/// The collision-prone variant picks distinct lengths sharing ceil(len/32),
/// which is exactly the shape the constant-subexpression step used to merge
/// incorrectly. Results are stored to scalar state slots so they reach the
/// event epilogue.
pub fn inject_keccak_pair(ctx: &mut GenContext, sink_slots: &[u64]) -> StrategyPayload {
    let collision_prone = ctx.prng.chance(0.75);
    let (len_a, len_b) = if collision_prone {
        let word = ctx.prng.chance(0.5);
        let (lo, hi) = if word { (1, 32) } else { (33, 64) };
        let a = ctx.prng.range(lo, hi);
        let mut b = ctx.prng.range(lo, hi);
        if b == a {
            b = if a == hi { lo } else { a + 1 };
        }
        (a, b)
    } else {
        let l = ctx.prng.range(1, 64);
        (l, l)
    };
    let prime = ctx.prng.next_bounded(256);
    let h0 = ctx.fresh_yul_name();
    let h1 = ctx.fresh_yul_name();
    let mut stmts = vec![
        YulStmt::Mstore {
            addr: 0,
            value: YulExpr::Lit(prime),
        },
        YulStmt::Mstore {
            addr: 32,
            value: YulExpr::Lit(prime),
        },
        YulStmt::Let {
            name: h0.clone(),
            value: YulExpr::Keccak { addr: 0, len: len_a },
        },
        YulStmt::Let {
            name: h1.clone(),
            value: YulExpr::Keccak { addr: 0, len: len_b },
        },
    ];
    if sink_slots.is_empty() {
        // No scalar storage to observe through; fold the hashes together so
        // they stay live, parked far above any used slot.
        stmts.push(YulStmt::Sstore {
            slot: SlotRef::Literal(OUT_OF_LAYOUT_SLOT),
            value: YulExpr::Op {
                op: YulOp::Xor,
                args: vec![YulExpr::Ref(h0), YulExpr::Ref(h1)],
            },
        });
    } else {
        let s0 = sink_slots[ctx.prng.next_bounded(sink_slots.len() as u64) as usize];
        let s1 = sink_slots[ctx.prng.next_bounded(sink_slots.len() as u64) as usize];
        stmts.push(YulStmt::Sstore {
            slot: SlotRef::Literal(s0),
            value: YulExpr::Ref(h0),
        });
        stmts.push(YulStmt::Sstore {
            slot: SlotRef::Literal(s1),
            value: YulExpr::Ref(h1),
        });
    }
    StrategyPayload {
        kind: PayloadKind::KeccakPair,
        stmts,
    }
}

/// Slot far outside the generated storage layout, used when a payload needs
/// a write sink but no scalar state variable exists.
pub const OUT_OF_LAYOUT_SLOT: u64 = 0x10_0000;

/// Storage write, a call to a user-defined Yul function that halts with
/// `return(0,0)` or `stop()`, then an overwriting store on the (dead)
/// continuing path. The wrapper-function indirection is what lets the
/// optimizer see the halt only behind a call.
pub fn inject_storage_write_return(ctx: &mut GenContext, sink_slots: &[u64]) -> StrategyPayload {
    let slot = if sink_slots.is_empty() {
        OUT_OF_LAYOUT_SLOT
    } else {
        sink_slots[ctx.prng.next_bounded(sink_slots.len() as u64) as usize]
    };
    let v1 = ctx.prng.next_bounded(1 << 32);
    let v2 = ctx.prng.next_bounded(1 << 32);
    let use_return = ctx.prng.chance(0.5);
    let wrapper = ctx.fresh_yul_fn_name();
    let halt = if use_return {
        YulStmt::HaltReturn
    } else {
        YulStmt::HaltStop
    };
    let stmts = vec![
        YulStmt::FnDef {
            name: wrapper.clone(),
            params: vec![],
            ret: None,
            body: vec![halt],
        },
        YulStmt::Sstore {
            slot: SlotRef::Literal(slot),
            value: YulExpr::Lit(v1),
        },
        YulStmt::Call {
            name: wrapper,
            args: vec![],
        },
        YulStmt::Sstore {
            slot: SlotRef::Literal(slot),
            value: YulExpr::Lit(v2),
        },
    ];
    StrategyPayload {
        kind: PayloadKind::StorageWriteReturn,
        stmts,
    }
}

/// Post-hoc screen for the four undefined behaviors. Generation rules are
/// designed to make this pass on 100% of generator output; it exists so the
/// guarantee is re-checkable on any tree.
pub fn ub_screen(program: &Program) -> Vec<Violation> {
    let mut violations = Vec::new();
    let array_names: Vec<&str> = program.arrays.iter().map(|a| a.name.as_str()).collect();
    let array_slots: Vec<u64> = program.array_slots().iter().map(|&(_, s)| s).collect();

    let mut check_body = |stmts: &[Stmt], where_: String| {
        walk_stmts(stmts, &mut |s| {
            // (1) no array manipulation or reference inside inline assembly
            if let Stmt::YulBlock(yul) = s {
                walk_yul(yul, &mut |ys| {
                    let mut names: Vec<&str> = Vec::new();
                    match ys {
                        YulStmt::Let { name, .. } | YulStmt::Assign { name, .. } => {
                            names.push(name)
                        }
                        YulStmt::Sstore { slot, .. } => {
                            match slot {
                                SlotRef::Literal(n) => {
                                    if array_slots.contains(n) {
                                        violations.push(Violation {
                                            rule: "ub-array-length-write",
                                            path: where_.clone(),
                                            fragment: format!("sstore slot {n}"),
                                        });
                                    }
                                }
                                SlotRef::StateVar(name) => names.push(name),
                            }
                        }
                        YulStmt::Call { name, .. } | YulStmt::FnDef { name, .. } => {
                            // (4) verbatim is banned everywhere
                            if name.contains("verbatim") {
                                violations.push(Violation {
                                    rule: "ub-verbatim",
                                    path: where_.clone(),
                                    fragment: name.clone(),
                                });
                            }
                        }
                        _ => {}
                    }
                    for n in names {
                        if array_names.contains(&n) {
                            violations.push(Violation {
                                rule: "ub-yul-array-ref",
                                path: where_.clone(),
                                fragment: n.to_string(),
                            });
                        }
                    }
                });
            }
            // (2) no side-effecting call arguments
            walk_exprs_of(s, &mut |e| {
                if let Expr::Call { callee, args } = e {
                    for a in args {
                        let mut bad = false;
                        walk_expr(a, &mut |x| {
                            if matches!(x, Expr::IncDec { .. }) {
                                bad = true;
                            }
                            if let Expr::Call { callee: inner, .. } = x {
                                if let Some(f) = program.function(inner) {
                                    if f.mutability != Mutability::Pure {
                                        bad = true;
                                    }
                                }
                            }
                        });
                        if bad {
                            violations.push(Violation {
                                rule: "ub-arg-evaluation-order",
                                path: where_.clone(),
                                fragment: callee.clone(),
                            });
                        }
                    }
                }
            });
            // (3) arrays grow by exactly one element and are not read in the
            // growing statement
            if let Stmt::ArrayOp {
                array,
                op: ArrayOpKind::Push(e),
            } = s
            {
                let mut reads_self = false;
                walk_expr(e, &mut |x| match x {
                    Expr::ArrayLen(a)
                    | Expr::Index { array: a, .. } => {
                        if a == array {
                            reads_self = true;
                        }
                    }
                    Expr::IndexGuard { array: a, .. } => {
                        if a == array {
                            reads_self = true;
                        }
                    }
                    _ => {}
                });
                if reads_self {
                    violations.push(Violation {
                        rule: "ub-dangling-reference",
                        path: where_.clone(),
                        fragment: array.clone(),
                    });
                }
            }
        });
    };

    for (i, m) in program.modifiers.iter().enumerate() {
        check_body(&m.body, format!("modifiers[{i}]"));
    }
    for (i, f) in program.functions.iter().enumerate() {
        for (j, b) in f.body.iter().enumerate() {
            check_body(&b.stmts, format!("functions[{i}].body[{j}]"));
        }
    }
    violations
}

/// Structural check for the keccak-pair trigger conditions: same base
/// address, and no control-flow-breaking statement between the two hashes.
pub fn keccak_pair_conditions_hold(stmts: &[YulStmt]) -> bool {
    let mut keccak_positions: Vec<(usize, u64, u64)> = Vec::new();
    for (i, s) in stmts.iter().enumerate() {
        if let YulStmt::Let { value, .. } | YulStmt::Assign { value, .. } = s {
            if let YulExpr::Keccak { addr, len } = value {
                keccak_positions.push((i, *addr, *len));
            }
        }
    }
    for pair in keccak_positions.windows(2) {
        let (i, addr_a, _) = pair[0];
        let (j, addr_b, _) = pair[1];
        if addr_a != addr_b {
            return false;
        }
        for s in &stmts[i + 1..j] {
            if matches!(
                s,
                YulStmt::If { .. } | YulStmt::For { .. } | YulStmt::Call { .. }
            ) {
                return false;
            }
        }
    }
    true
}

/// Tracks per-statement usage states, keyed by variable name.
#[derive(Debug, Default)]
pub struct UsageMap {
    states: BTreeMap<String, UsageState>,
}

impl UsageMap {
    pub fn reset(&mut self) {
        self.states.clear();
    }

    pub fn get(&self, var: &str) -> UsageState {
        self.states.get(var).copied().unwrap_or_default()
    }

    pub fn request(&mut self, var: &str, request: UsageRequest) -> GateDecision {
        let (decision, next) = usage_gate(self.get(var), request);
        self.states.insert(var.to_string(), next);
        decision
    }

    /// Pre-marks a variable (e.g. an assignment target) as plainly used.
    pub fn mark_plain(&mut self, var: &str) {
        let (_, next) = usage_gate(self.get(var), UsageRequest::Plain);
        self.states.insert(var.to_string(), next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_gate_full_table() {
        use GateDecision::*;
        use UsageRequest::*;
        use UsageState::*;
        let table = [
            ((Unused, Plain), (AllowPlain, UsedPlain)),
            ((UsedPlain, Plain), (AllowPlain, UsedPlain)),
            ((UsedIncDec, Plain), (SubstituteConstant, UsedIncDec)),
            ((Unused, IncDec), (AllowIncDec, UsedIncDec)),
            ((UsedPlain, IncDec), (SubstituteConstant, UsedPlain)),
            ((UsedIncDec, IncDec), (SubstituteConstant, UsedIncDec)),
        ];
        for ((state, req), want) in table {
            assert_eq!(usage_gate(state, req), want, "{state:?} + {req:?}");
        }
    }

    #[test]
    fn placeholder_gate_table() {
        assert_eq!(placeholder_gate(0), PlaceholderDecision::EmitPlaceholder);
        assert_eq!(placeholder_gate(1), PlaceholderDecision::Redraw);
    }

    #[test]
    fn usage_map_absorbs_incdec() {
        let mut m = UsageMap::default();
        assert_eq!(m.request("x", UsageRequest::IncDec), GateDecision::AllowIncDec);
        assert_eq!(
            m.request("x", UsageRequest::Plain),
            GateDecision::SubstituteConstant
        );
        m.reset();
        assert_eq!(m.request("x", UsageRequest::Plain), GateDecision::AllowPlain);
    }

    #[test]
    fn keccak_pair_condition_checker() {
        let good = vec![
            YulStmt::Mstore {
                addr: 0,
                value: YulExpr::Lit(0),
            },
            YulStmt::Let {
                name: "h0".into(),
                value: YulExpr::Keccak { addr: 0, len: 32 },
            },
            YulStmt::Let {
                name: "h1".into(),
                value: YulExpr::Keccak { addr: 0, len: 23 },
            },
        ];
        assert!(keccak_pair_conditions_hold(&good));
        let broken = vec![
            YulStmt::Let {
                name: "h0".into(),
                value: YulExpr::Keccak { addr: 0, len: 32 },
            },
            YulStmt::If {
                cond: YulExpr::Lit(1),
                body: vec![],
            },
            YulStmt::Let {
                name: "h1".into(),
                value: YulExpr::Keccak { addr: 0, len: 23 },
            },
        ];
        assert!(!keccak_pair_conditions_hold(&broken));
    }
}
