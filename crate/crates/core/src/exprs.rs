//! Typed expression generation with compliance guards: explicit casts on
//! type mismatches, division guards on divisors, usage-gated inc/dec
//! insertion, and bounds-guarded array reads.

use crate::ast::*;
use crate::context::GenContext;
use crate::policies::{GateDecision, UsageRequest};

/// What an expression at the current site may reference. Built per site from
/// the surrounding function's mutability and position.
#[derive(Debug, Clone, Copy)]
pub struct ExprPolicy {
    pub allow_locals: bool,
    pub allow_state: bool,
    pub allow_const: bool,
    pub allow_arrays: bool,
    pub allow_calls: bool,
    pub allow_selector: bool,
    /// Inc/dec mutates, so it additionally requires state-write permission
    /// for state variables and is banned in side-effect-free positions.
    pub allow_incdec: bool,
    /// Index of the function under construction; calls may only target
    /// lower indices, which keeps the call graph acyclic.
    pub current_fn_index: usize,
    /// Product of enclosing loop bounds; scales callee cost at call sites.
    pub loop_multiplier: u64,
}

impl ExprPolicy {
    pub fn for_mutability(m: Mutability, fn_index: usize) -> ExprPolicy {
        ExprPolicy {
            allow_locals: true,
            allow_state: m.can_read_state(),
            allow_const: true,
            allow_arrays: m.can_read_state(),
            allow_calls: true,
            allow_selector: m != Mutability::Pure,
            allow_incdec: m.can_write_state(),
            current_fn_index: fn_index,
            loop_multiplier: 1,
        }
    }

    /// Modifier bodies reference state, constants and arrays only.
    pub fn for_modifier() -> ExprPolicy {
        ExprPolicy {
            allow_locals: false,
            allow_state: true,
            allow_const: true,
            allow_arrays: true,
            allow_calls: false,
            allow_selector: false,
            allow_incdec: true,
            current_fn_index: 0,
            loop_multiplier: 1,
        }
    }

    pub fn side_effect_free(mut self) -> ExprPolicy {
        self.allow_incdec = false;
        self
    }

    pub fn no_calls(mut self) -> ExprPolicy {
        self.allow_calls = false;
        self
    }
}

/// Work-budget ceiling for `loop_multiplier * callee_work` at a call site.
pub const CALL_WORK_BUDGET: u64 = 20_000;

pub fn draw_ty(ctx: &mut GenContext) -> Ty {
    if ctx.prng.chance(0.5) {
        Ty::Uint256
    } else {
        Ty::Int256
    }
}

/// Literal value classes: mostly small values, some 64-bit, occasionally
/// boundary magnitudes that exercise wraparound inside unchecked blocks.
pub fn draw_literal(ctx: &mut GenContext, ty: Ty) -> Literal {
    let class = ctx.pick_weighted(&[(0u8, 11.0), (1u8, 4.0), (2u8, 1.0)]);
    match (class, ty) {
        (0, Ty::Uint256) => Literal::unsigned(ctx.prng.next_bounded(256)),
        (0, Ty::Int256) => {
            let mag = ctx.prng.next_bounded(256) as i64;
            Literal::signed(if ctx.prng.chance(0.4) { -mag } else { mag })
        }
        (1, Ty::Uint256) => Literal::unsigned(ctx.prng.next_u64()),
        (1, Ty::Int256) => {
            let mag = (ctx.prng.next_u64() >> 1) as i64;
            Literal::signed(if ctx.prng.chance(0.4) { -mag } else { mag })
        }
        (_, Ty::Uint256) => {
            let table = [
                UINT256_MAX,
                // 2^255
                "57896044618658097711785492504343953926634992332820282019728792003956564819968",
                // 2^128
                "340282366920938463463374607431768211456",
            ];
            Literal::from_decimal(table[ctx.prng.next_bounded(3) as usize])
        }
        (_, Ty::Int256) => {
            let mag = INT256_MAX_MAG;
            if ctx.prng.chance(0.5) {
                Literal::from_decimal(mag)
            } else {
                Literal::from_decimal(&format!("-{mag}"))
            }
        }
    }
}

#[derive(Clone)]
enum Operand {
    Var { name: String, ty: Ty, mutable: bool },
    ArrayRead { array: String },
}

/// Collects every variable-like operand the policy allows at this site.
fn operand_pool(ctx: &GenContext, policy: &ExprPolicy) -> Vec<Operand> {
    let mut pool = Vec::new();
    if policy.allow_locals {
        for l in ctx.visible_locals() {
            pool.push(Operand::Var {
                name: l.name,
                ty: l.ty,
                mutable: true,
            });
        }
        for c in &ctx.counters {
            pool.push(Operand::Var {
                name: c.clone(),
                ty: Ty::Uint256,
                mutable: false,
            });
        }
    }
    for sv in &ctx.state_syms {
        let allowed = if sv.is_constant {
            policy.allow_const
        } else {
            policy.allow_state
        };
        if allowed {
            pool.push(Operand::Var {
                name: sv.name.clone(),
                ty: sv.ty,
                mutable: !sv.is_constant && policy.allow_incdec,
            });
        }
    }
    if policy.allow_arrays {
        for a in &ctx.array_syms {
            pool.push(Operand::ArrayRead {
                array: a.name.clone(),
            });
        }
    }
    pool
}

/// Generates an expression of exactly `target_ty`. Depth 0 yields leaves.
pub fn gen_arith_expr(
    ctx: &mut GenContext,
    target_ty: Ty,
    depth: u64,
    policy: &ExprPolicy,
) -> Expr {
    if depth == 0 {
        return gen_leaf(ctx, target_ty, policy);
    }
    let w = ctx.cfg.expr_weights.clone();
    let selector_w = if policy.allow_selector {
        ctx.active_weights().selector_access
    } else {
        0.0
    };
    let call_w = if policy.allow_calls { w.call } else { 0.0 };
    let kind = ctx.pick_weighted(&[
        (ExprKind::Literal, w.literal),
        (ExprKind::Var, w.var_ref),
        (ExprKind::Binary, w.binary),
        (ExprKind::Call, call_w),
        (ExprKind::IndexGuard, w.index_guard),
        (ExprKind::Selector, selector_w),
    ]);
    match kind {
        ExprKind::Binary => {
            let op = ctx.pick_weighted(&[
                (BinOp::Add, 3.0),
                (BinOp::Sub, 3.0),
                (BinOp::Mul, 2.0),
                (BinOp::Div, 1.0),
                (BinOp::Mod, 1.0),
            ]);
            let lhs = gen_arith_expr(ctx, target_ty, depth - 1, policy);
            let rhs = if op.is_div_like() {
                // Divisors are emitted twice by the guard, so they must be
                // side-effect-free; small nonzero literals skip the guard.
                if ctx.prng.chance(0.3) {
                    let v = 1 + ctx.prng.next_bounded(254);
                    Expr::IntLit(target_ty, Literal::unsigned(v))
                } else {
                    let divisor_policy = policy.side_effect_free().no_calls();
                    let d = gen_arith_expr(ctx, target_ty, depth.saturating_sub(2), &divisor_policy);
                    Expr::DivGuard(Box::new(d))
                }
            } else {
                gen_arith_expr(ctx, target_ty, depth - 1, policy)
            };
            Expr::binary(op, lhs, rhs)
        }
        ExprKind::Call => match gen_call_expr(ctx, target_ty, policy) {
            Some(e) => e,
            None => gen_leaf(ctx, target_ty, policy),
        },
        ExprKind::Literal | ExprKind::Var | ExprKind::IndexGuard | ExprKind::Selector => {
            gen_leaf_of_kind(ctx, target_ty, policy, kind)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum ExprKind {
    Literal,
    Var,
    Binary,
    Call,
    IndexGuard,
    Selector,
}

fn gen_leaf(ctx: &mut GenContext, target_ty: Ty, policy: &ExprPolicy) -> Expr {
    let w = ctx.cfg.expr_weights.clone();
    let selector_w = if policy.allow_selector {
        ctx.active_weights().selector_access
    } else {
        0.0
    };
    let kind = ctx.pick_weighted(&[
        (ExprKind::Literal, w.literal),
        (ExprKind::Var, w.var_ref + 1.0),
        (ExprKind::IndexGuard, w.index_guard),
        (ExprKind::Selector, selector_w),
    ]);
    gen_leaf_of_kind(ctx, target_ty, policy, kind)
}

fn gen_leaf_of_kind(
    ctx: &mut GenContext,
    target_ty: Ty,
    policy: &ExprPolicy,
    kind: ExprKind,
) -> Expr {
    match kind {
        ExprKind::Var => match pick_operand(ctx, target_ty, policy) {
            Some(e) => e,
            None => Expr::IntLit(target_ty, draw_literal(ctx, target_ty)),
        },
        ExprKind::IndexGuard => match gen_index_guard(ctx, target_ty, policy) {
            Some(e) => e,
            None => Expr::IntLit(target_ty, draw_literal(ctx, target_ty)),
        },
        ExprKind::Selector => match gen_selector_leaf(ctx, target_ty, policy) {
            Some(e) => e,
            None => Expr::IntLit(target_ty, draw_literal(ctx, target_ty)),
        },
        _ => Expr::IntLit(target_ty, draw_literal(ctx, target_ty)),
    }
}

/// Picks a variable operand, consulting the usage gate; any type mismatch is
/// resolved with an explicit cast.
fn pick_operand(ctx: &mut GenContext, target_ty: Ty, policy: &ExprPolicy) -> Option<Expr> {
    let pool = operand_pool(ctx, policy);
    if pool.is_empty() {
        return None;
    }
    let choice = pool[ctx.prng.next_bounded(pool.len() as u64) as usize].clone();
    match choice {
        Operand::Var { name, ty, mutable } => {
            let want_incdec = policy.allow_incdec
                && mutable
                && ctx.prng.next_f64() * 10.0 < ctx.cfg.expr_weights.inc_dec;
            let request = if want_incdec {
                UsageRequest::IncDec
            } else {
                UsageRequest::Plain
            };
            let expr = match ctx.usage.request(&name, request) {
                GateDecision::SubstituteConstant => {
                    return Some(Expr::IntLit(target_ty, draw_literal(ctx, target_ty)));
                }
                GateDecision::AllowIncDec => Expr::IncDec {
                    var: name,
                    inc: ctx.prng.chance(0.5),
                },
                GateDecision::AllowPlain => Expr::VarRef(name),
            };
            Some(with_cast(expr, ty, target_ty))
        }
        Operand::ArrayRead { array } => {
            let index = ctx.prng.next_bounded(8);
            let fallback = Literal::unsigned(ctx.prng.next_bounded(256));
            Some(with_cast(
                Expr::IndexGuard {
                    array,
                    index,
                    fallback,
                },
                Ty::Uint256,
                target_ty,
            ))
        }
    }
}

fn gen_index_guard(ctx: &mut GenContext, target_ty: Ty, policy: &ExprPolicy) -> Option<Expr> {
    if !policy.allow_arrays || ctx.array_syms.is_empty() {
        return None;
    }
    let i = ctx.prng.next_bounded(ctx.array_syms.len() as u64) as usize;
    let array = ctx.array_syms[i].name.clone();
    let index = ctx.prng.next_bounded(8);
    let fallback = Literal::unsigned(ctx.prng.next_bounded(256));
    Some(with_cast(
        Expr::IndexGuard {
            array,
            index,
            fallback,
        },
        Ty::Uint256,
        target_ty,
    ))
}

fn gen_selector_leaf(ctx: &mut GenContext, target_ty: Ty, policy: &ExprPolicy) -> Option<Expr> {
    if !policy.allow_selector {
        return None;
    }
    let candidates: Vec<String> = ctx
        .fn_syms
        .iter()
        .filter(|f| f.visibility.in_abi())
        .map(|f| f.name.clone())
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let function = candidates[ctx.prng.next_bounded(candidates.len() as u64) as usize].clone();
    Some(with_cast(
        Expr::SelectorAccess { function },
        Ty::Uint256,
        target_ty,
    ))
}

/// Call expression with side-effect-free arguments; nested calls are allowed
/// only to pure functions while nesting depth permits.
pub fn gen_call_expr(ctx: &mut GenContext, target_ty: Ty, policy: &ExprPolicy) -> Option<Expr> {
    if !policy.allow_calls || ctx.call_nesting_depth >= ctx.cfg.max_call_nesting {
        return None;
    }
    let caller_mutability = ctx
        .fn_syms
        .get(policy.current_fn_index)
        .map(|f| f.mutability)
        .unwrap_or(Mutability::Default);
    let nested = ctx.call_nesting_depth > 0;
    let budget = CALL_WORK_BUDGET / policy.loop_multiplier.max(1);
    let candidates: Vec<(usize, Ty)> = ctx
        .fn_syms
        .iter()
        .filter(|f| {
            f.index < policy.current_fn_index
                && f.ret.is_some()
                && f.visibility != Visibility::External
                && f.work <= budget
                && mutability_callable(caller_mutability, f.mutability)
                && (!nested || f.mutability == Mutability::Pure)
        })
        .map(|f| (f.index, f.ret.expect("filtered on ret")))
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let (idx, ret_ty) = candidates[ctx.prng.next_bounded(candidates.len() as u64) as usize];
    let callee = ctx.fn_syms[idx].name.clone();
    let param_tys = ctx.fn_syms[idx].params.clone();

    ctx.call_nesting_depth += 1;
    let mut args = Vec::new();
    for pty in param_tys {
        args.push(gen_call_arg(ctx, pty, policy));
    }
    ctx.call_nesting_depth -= 1;

    Some(with_cast(Expr::Call { callee, args }, ret_ty, target_ty))
}

fn mutability_callable(caller: Mutability, callee: Mutability) -> bool {
    match caller {
        Mutability::Pure => callee == Mutability::Pure,
        Mutability::View => matches!(callee, Mutability::Pure | Mutability::View),
        _ => true,
    }
}

/// Arguments are side-effect-free: literals, variable reads, casts, or — if
/// nesting depth allows — calls to pure functions.
fn gen_call_arg(ctx: &mut GenContext, ty: Ty, policy: &ExprPolicy) -> Expr {
    if ctx.call_nesting_depth < ctx.cfg.max_call_nesting && ctx.prng.chance(0.25) {
        let arg_policy = policy.side_effect_free();
        if let Some(call) = gen_call_expr(ctx, ty, &arg_policy) {
            return call;
        }
    }
    if ctx.prng.chance(0.5) {
        let leaf_policy = policy.side_effect_free();
        if let Some(v) = pick_operand(ctx, ty, &leaf_policy) {
            return v;
        }
    }
    Expr::IntLit(ty, draw_literal(ctx, ty))
}

/// Condition: a relational comparison of two same-typed side-effect-free
/// operands, or a logical combination of 2-3 such comparisons.
pub fn gen_condition(ctx: &mut GenContext, policy: &ExprPolicy) -> Expr {
    if ctx.prng.chance(0.6) {
        gen_relational(ctx, policy)
    } else {
        let n = 2 + ctx.prng.next_bounded(2);
        let first = gen_relational(ctx, policy);
        let mut e = maybe_not(ctx, first);
        for _ in 1..n {
            let op = if ctx.prng.chance(0.5) {
                BinOp::And
            } else {
                BinOp::Or
            };
            let next = gen_relational(ctx, policy);
            let next = maybe_not(ctx, next);
            e = Expr::binary(op, e, next);
        }
        e
    }
}

fn maybe_not(ctx: &mut GenContext, e: Expr) -> Expr {
    if ctx.prng.chance(0.2) {
        Expr::Not(Box::new(e))
    } else {
        e
    }
}

fn gen_relational(ctx: &mut GenContext, policy: &ExprPolicy) -> Expr {
    let ty = draw_ty(ctx);
    let op = ctx.pick_weighted(&[
        (BinOp::Gt, 1.0),
        (BinOp::Lt, 1.0),
        (BinOp::Eq, 1.0),
        (BinOp::Ne, 1.0),
    ]);
    let operand_policy = policy.side_effect_free().no_calls();
    let lhs = gen_cond_operand(ctx, ty, &operand_policy);
    let rhs = gen_cond_operand(ctx, ty, &operand_policy);
    Expr::binary(op, lhs, rhs)
}

fn gen_cond_operand(ctx: &mut GenContext, ty: Ty, policy: &ExprPolicy) -> Expr {
    if ctx.prng.chance(0.7) {
        if let Some(v) = pick_operand(ctx, ty, policy) {
            return v;
        }
    }
    Expr::IntLit(ty, draw_literal(ctx, ty))
}

fn with_cast(e: Expr, actual: Ty, target: Ty) -> Expr {
    if actual == target {
        e
    } else {
        Expr::cast(target, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GenConfig;
    use crate::context::StateSym;
    use crate::validate::walk_expr;

    fn ctx_with_state() -> GenContext {
        let mut c = GenContext::new(7, GenConfig::default());
        c.state_syms.push(StateSym {
            name: "sv0".into(),
            ty: Ty::Uint256,
            is_constant: false,
            slot: Some(0),
        });
        c.state_syms.push(StateSym {
            name: "sv1".into(),
            ty: Ty::Int256,
            is_constant: false,
            slot: Some(1),
        });
        c.begin_function(0);
        c
    }

    #[test]
    fn depth_zero_yields_leaves() {
        let mut c = ctx_with_state();
        let policy = ExprPolicy::for_mutability(Mutability::Default, 0);
        for _ in 0..100 {
            c.usage.reset();
            let e = gen_arith_expr(&mut c, Ty::Uint256, 0, &policy);
            assert!(
                matches!(
                    e,
                    Expr::IntLit(..)
                        | Expr::VarRef(_)
                        | Expr::IncDec { .. }
                        | Expr::Cast { .. }
                        | Expr::IndexGuard { .. }
                        | Expr::SelectorAccess { .. }
                ),
                "{e:?}"
            );
        }
    }

    #[test]
    fn divisors_are_guarded_or_nonzero() {
        let mut c = ctx_with_state();
        let policy = ExprPolicy::for_mutability(Mutability::Default, 0);
        for _ in 0..400 {
            c.usage.reset();
            let e = gen_arith_expr(&mut c, Ty::Int256, 4, &policy);
            walk_expr(&e, &mut |x| {
                if let Expr::Binary { op, rhs, .. } = x {
                    if op.is_div_like() {
                        match rhs.as_ref() {
                            Expr::DivGuard(_) => {}
                            Expr::IntLit(_, lit) => assert!(!lit.is_zero()),
                            other => panic!("unguarded divisor: {other:?}"),
                        }
                    }
                }
            });
        }
    }

    #[test]
    fn mismatched_operands_get_casts() {
        let mut c = ctx_with_state();
        let policy = ExprPolicy::for_mutability(Mutability::Default, 0);
        // sv1 is int256; when it appears in a uint256 expression it must be
        // wrapped. Generate plenty and typecheck structurally.
        for _ in 0..300 {
            c.usage.reset();
            let e = gen_arith_expr(&mut c, Ty::Uint256, 3, &policy);
            assert_expr_ty(&e, Ty::Uint256, &c);
        }
    }

    fn assert_expr_ty(e: &Expr, want: Ty, c: &GenContext) {
        match e {
            Expr::IntLit(ty, _) => assert_eq!(*ty, want),
            Expr::VarRef(name) | Expr::IncDec { var: name, .. } => {
                let ty = c
                    .state_syms
                    .iter()
                    .find(|s| &s.name == name)
                    .map(|s| s.ty)
                    .or_else(|| {
                        c.visible_locals()
                            .iter()
                            .find(|l| &l.name == name)
                            .map(|l| l.ty)
                    })
                    .unwrap_or(Ty::Uint256);
                assert_eq!(ty, want, "var {name}");
            }
            Expr::Cast { target, .. } => assert_eq!(*target, want),
            Expr::Binary { op, lhs, rhs } if op.is_arith() => {
                assert_expr_ty(lhs, want, c);
                if let Expr::DivGuard(inner) = rhs.as_ref() {
                    assert_expr_ty(inner, want, c);
                } else {
                    assert_expr_ty(rhs, want, c);
                }
            }
            Expr::IndexGuard { .. } | Expr::SelectorAccess { .. } => {
                assert_eq!(want, Ty::Uint256)
            }
            Expr::Call { .. } => {}
            other => panic!("unexpected node {other:?}"),
        }
    }

    #[test]
    fn no_calls_without_candidates() {
        let mut c = ctx_with_state();
        let policy = ExprPolicy::for_mutability(Mutability::Default, 0);
        assert!(gen_call_expr(&mut c, Ty::Uint256, &policy).is_none());
    }

    #[test]
    fn conditions_are_boolean_and_side_effect_free() {
        let mut c = ctx_with_state();
        let policy = ExprPolicy::for_mutability(Mutability::Default, 0);
        for _ in 0..300 {
            c.usage.reset();
            let e = gen_condition(&mut c, &policy);
            walk_expr(&e, &mut |x| match x {
                Expr::IncDec { .. } | Expr::Call { .. } => {
                    panic!("side effect in condition: {x:?}")
                }
                Expr::Binary { op, .. } if op.is_arith() => {
                    panic!("arithmetic in condition")
                }
                _ => {}
            });
        }
    }
}
