//! Environment construction: the contract skeleton with SPDX header, pragma,
//! events, state variables (with a constant subset), dynamic arrays, and
//! modifiers. Functions come later from the body builder.

use crate::ast::*;
use crate::body::wrap_unchecked_runs;
use crate::context::{ArraySym, GenContext, StateSym};
use crate::exprs::{draw_literal, draw_ty, gen_arith_expr, gen_condition, ExprPolicy};
use crate::policies::{placeholder_gate, PlaceholderDecision};

pub const SPDX_ID: &str = "MIT";
pub const PRAGMA_FLOOR: &str = "0.8.0";
pub const CONTRACT_NAME: &str = "C";

/// Builds the program skeleton and registers every symbol in the context.
/// The two generic logging events are always declared so instrumentation
/// never depends on which state variables exist.
pub fn build_environment(ctx: &mut GenContext) -> Program {
    let events = vec![
        EventDecl {
            name: "LogU".to_string(),
            params: vec![
                ("id".to_string(), Ty::Uint256),
                ("value".to_string(), Ty::Uint256),
            ],
        },
        EventDecl {
            name: "LogI".to_string(),
            params: vec![
                ("id".to_string(), Ty::Uint256),
                ("value".to_string(), Ty::Int256),
            ],
        },
    ];

    let n_state = ctx.prng.range(
        ctx.cfg.state_var_count_range.lo,
        ctx.cfg.state_var_count_range.hi,
    );
    let mut state_vars = Vec::new();
    let mut slot = 0u64;
    for i in 0..n_state {
        let ty = draw_ty(ctx);
        let init = draw_literal(ctx, ty);
        let is_constant = ctx.prng.chance(0.25);
        let name = format!("sv{i}");
        state_vars.push(StateVar {
            name: name.clone(),
            ty,
            init,
            is_constant,
        });
        ctx.state_syms.push(StateSym {
            name,
            ty,
            is_constant,
            slot: if is_constant {
                None
            } else {
                let s = slot;
                slot += 1;
                Some(s)
            },
        });
    }

    let n_arrays = ctx
        .prng
        .range(ctx.cfg.array_count_range.lo, ctx.cfg.array_count_range.hi);
    let mut arrays = Vec::new();
    for i in 0..n_arrays {
        let len = ctx
            .prng
            .range(ctx.cfg.array_len_range.lo, ctx.cfg.array_len_range.hi);
        let init_elems: Vec<Literal> = (0..len)
            .map(|_| Literal::unsigned(ctx.prng.next_bounded(256)))
            .collect();
        let name = format!("arr{i}");
        arrays.push(DynArray {
            name: name.clone(),
            init_elems,
        });
        ctx.array_syms.push(ArraySym {
            name,
            init_len: len,
            slot,
        });
        slot += 1;
    }

    let n_modifiers = ctx.prng.range(
        ctx.cfg.modifier_count_range.lo,
        ctx.cfg.modifier_count_range.hi,
    );
    let mut modifiers = Vec::new();
    for i in 0..n_modifiers {
        let m = gen_modifier(ctx, i as usize);
        ctx.modifier_names.push(m.name.clone());
        modifiers.push(m);
    }

    Program {
        spdx_id: SPDX_ID.to_string(),
        pragma_floor: PRAGMA_FLOOR.to_string(),
        contract_name: CONTRACT_NAME.to_string(),
        events,
        state_vars,
        arrays,
        modifiers,
        functions: Vec::new(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum ModifierNode {
    AssignState,
    Conditional,
    ArrayOp,
    Placeholder,
}

/// Modifier body over state variables and arrays only, with exactly one
/// placeholder. The placeholder gate redraws once a placeholder exists; if
/// the body ends without one, a trailing `_;` is appended.
pub fn gen_modifier(ctx: &mut GenContext, index: usize) -> ModifierDecl {
    ctx.placeholder_counter = 0;
    ctx.begin_function(0);
    let writable: Vec<(String, Ty)> = ctx
        .state_syms
        .iter()
        .filter(|s| !s.is_constant)
        .map(|s| (s.name.clone(), s.ty))
        .collect();
    let has_arrays = !ctx.array_syms.is_empty();

    let mut stmts = Vec::new();
    let n_nodes = ctx.prng.range(1, 3);
    for _ in 0..n_nodes {
        // Redraw until the drawn kind is constructible; the placeholder kind
        // redraws via the counter gate.
        let mut emitted = false;
        for _ in 0..6 {
            let kind = ctx.pick_weighted(&[
                (
                    ModifierNode::AssignState,
                    if writable.is_empty() { 0.0 } else { 3.0 },
                ),
                (ModifierNode::Conditional, 2.0),
                (ModifierNode::ArrayOp, if has_arrays { 2.0 } else { 0.0 }),
                (ModifierNode::Placeholder, 2.0),
            ]);
            let stmt = match kind {
                ModifierNode::Placeholder => match placeholder_gate(ctx.placeholder_counter) {
                    PlaceholderDecision::EmitPlaceholder => {
                        ctx.placeholder_counter += 1;
                        Some(Stmt::Placeholder)
                    }
                    PlaceholderDecision::Redraw => None,
                },
                ModifierNode::AssignState => Some(gen_state_assign(ctx, &writable)),
                ModifierNode::Conditional => Some(gen_modifier_conditional(ctx, &writable)),
                ModifierNode::ArrayOp => gen_modifier_array_op(ctx),
            };
            if let Some(s) = stmt {
                stmts.push(s);
                emitted = true;
                break;
            }
        }
        let _ = emitted;
    }
    if ctx.placeholder_counter == 0 {
        stmts.push(Stmt::Placeholder);
        ctx.placeholder_counter = 1;
    }
    ModifierDecl {
        name: format!("m{index}"),
        body: wrap_unchecked_runs(stmts),
        placeholder_count: 1,
    }
}

fn gen_state_assign(ctx: &mut GenContext, writable: &[(String, Ty)]) -> Stmt {
    let (target, ty) = writable[ctx.prng.next_bounded(writable.len() as u64) as usize].clone();
    ctx.usage.reset();
    ctx.usage.mark_plain(&target);
    let op = ctx.pick_weighted(&[
        (AssignOp::Assign, 3.0),
        (AssignOp::AddAssign, 2.0),
        (AssignOp::SubAssign, 2.0),
    ]);
    let policy = ExprPolicy::for_modifier();
    let depth = ctx.prng.range(1, ctx.cfg.max_expr_depth.max(1));
    let value = gen_arith_expr(ctx, ty, depth, &policy);
    Stmt::Assign { target, op, value }
}

fn gen_modifier_conditional(ctx: &mut GenContext, writable: &[(String, Ty)]) -> Stmt {
    ctx.usage.reset();
    let policy = ExprPolicy::for_modifier();
    let cond = gen_condition(ctx, &policy);
    let mut then_block = Vec::new();
    let n = 1 + ctx.prng.next_bounded(2);
    for _ in 0..n {
        if !writable.is_empty() && ctx.prng.chance(0.7) {
            then_block.push(gen_state_assign(ctx, writable));
        } else if let Some(op) = gen_modifier_array_op(ctx) {
            then_block.push(op);
        }
    }
    Stmt::If {
        cond,
        then_block: wrap_unchecked_runs(then_block),
        else_block: None,
    }
}

fn gen_modifier_array_op(ctx: &mut GenContext) -> Option<Stmt> {
    if ctx.array_syms.is_empty() {
        return None;
    }
    let idx = ctx.prng.next_bounded(ctx.array_syms.len() as u64) as usize;
    let array = ctx.array_syms[idx].name.clone();
    let op = match ctx.pick_weighted(&[(0u8, 2.0), (1u8, 2.0), (2u8, 2.0)]) {
        0 => {
            ctx.usage.reset();
            let hidden = ctx.array_syms.remove(idx);
            let policy = ExprPolicy::for_modifier();
            let e = gen_arith_expr(ctx, Ty::Uint256, 1, &policy);
            ctx.array_syms.insert(idx, hidden);
            ArrayOpKind::Push(e)
        }
        1 => ArrayOpKind::GuardedPop,
        _ => ArrayOpKind::GuardedIndexUpdate {
            index: ctx.prng.next_bounded(8),
        },
    };
    Some(Stmt::ArrayOp { array, op })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CountRange, GenConfig};
    use crate::validate::walk_stmts;

    #[test]
    fn skeleton_registers_every_symbol_once() {
        let mut ctx = GenContext::new(5, GenConfig::default());
        let p = build_environment(&mut ctx);
        assert_eq!(p.state_vars.len(), ctx.state_syms.len());
        assert_eq!(p.arrays.len(), ctx.array_syms.len());
        for (sv, sym) in p.state_vars.iter().zip(&ctx.state_syms) {
            assert_eq!(sv.name, sym.name);
            assert_eq!(sv.is_constant, sym.is_constant);
            // Constants are a subset of the state table, without slots.
            assert_eq!(sym.slot.is_none(), sv.is_constant);
        }
        assert!(!p.events.is_empty());
    }

    #[test]
    fn empty_environment_still_has_events() {
        let mut cfg = GenConfig::default();
        cfg.state_var_count_range = CountRange::new(0, 0);
        cfg.array_count_range = CountRange::new(0, 0);
        cfg.modifier_count_range = CountRange::new(0, 0);
        let mut ctx = GenContext::new(5, cfg);
        let p = build_environment(&mut ctx);
        assert!(p.state_vars.is_empty());
        assert!(p.arrays.is_empty());
        assert!(p.modifiers.is_empty());
        assert_eq!(p.events.len(), 2);
    }

    #[test]
    fn array_init_lengths_recorded() {
        let mut ctx = GenContext::new(77, GenConfig::default());
        let p = build_environment(&mut ctx);
        for (a, sym) in p.arrays.iter().zip(&ctx.array_syms) {
            assert_eq!(a.init_elems.len() as u64, sym.init_len);
        }
    }

    #[test]
    fn every_modifier_has_exactly_one_placeholder() {
        for seed in 0..200 {
            let mut ctx = GenContext::new(seed, GenConfig::default());
            let p = build_environment(&mut ctx);
            for m in &p.modifiers {
                let mut count = 0;
                let mut top_level = 0;
                walk_stmts(&m.body, &mut |s| {
                    if matches!(s, Stmt::Placeholder) {
                        count += 1;
                    }
                });
                for s in &m.body {
                    if matches!(s, Stmt::Placeholder) {
                        top_level += 1;
                    }
                }
                assert_eq!(count, 1, "seed {seed} modifier {}", m.name);
                assert_eq!(top_level, 1, "placeholder must sit at body top level");
            }
        }
    }

    #[test]
    fn modifier_bodies_reference_no_locals() {
        for seed in 0..100 {
            let mut ctx = GenContext::new(seed, GenConfig::default());
            let p = build_environment(&mut ctx);
            let state_names: Vec<&str> =
                p.state_vars.iter().map(|s| s.name.as_str()).collect();
            for m in &p.modifiers {
                walk_stmts(&m.body, &mut |s| {
                    assert!(
                        !matches!(s, Stmt::LocalDecl { .. } | Stmt::YulBlock(_)),
                        "modifier contains forbidden statement"
                    );
                    crate::validate::walk_exprs_of(s, &mut |e| {
                        if let Expr::VarRef(name) = e {
                            assert!(
                                state_names.contains(&name.as_str()),
                                "modifier references non-state var {name}"
                            );
                        }
                    });
                });
            }
        }
    }
}
