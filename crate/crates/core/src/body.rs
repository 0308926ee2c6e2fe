//! Function frameworks and statement filling: per-node statement selection,
//! loops, conditionals, Yul blocks, array operations, the unchecked wrapping
//! pass, and the state-logging epilogue.

use crate::ast::*;
use crate::context::{FnSym, GenContext};
use crate::exprs::{draw_literal, draw_ty, gen_arith_expr, gen_condition, ExprPolicy};
use crate::policies::{inject_keccak_pair, inject_storage_write_return, PayloadKind};

/// Random function attributes; the body stays empty until `fill_function`.
pub fn gen_function_frame(ctx: &mut GenContext, index: usize) -> FunctionDecl {
    let name = format!("f{index}");
    let visibility = ctx.pick_weighted(&[
        (Visibility::Public, 1.0),
        (Visibility::External, 1.0),
        (Visibility::Internal, 1.0),
    ]);
    let mutability = ctx.pick_weighted(&[
        (Mutability::Default, 5.0),
        (Mutability::View, 2.0),
        (Mutability::Pure, 2.0),
        (Mutability::Payable, 1.0),
    ]);
    let n_params = ctx.prng.next_bounded(3);
    let params: Vec<(String, Ty)> = (0..n_params)
        .map(|i| (format!("p{i}"), draw_ty(ctx)))
        .collect();
    let returns = if ctx.prng.chance(0.6) {
        Some(("res".to_string(), draw_ty(ctx)))
    } else {
        None
    };
    // Modifier bodies touch state, so only state-writing functions take one.
    let applied_modifiers = if mutability.can_write_state()
        && !ctx.modifier_names.is_empty()
        && ctx.prng.chance(0.5)
    {
        let i = ctx.prng.next_bounded(ctx.modifier_names.len() as u64) as usize;
        vec![ctx.modifier_names[i].clone()]
    } else {
        Vec::new()
    };
    let frame = FunctionDecl {
        name: name.clone(),
        params: params.clone(),
        visibility,
        mutability,
        returns: returns.clone(),
        applied_modifiers,
        body: Vec::new(),
    };
    ctx.fn_syms.push(FnSym {
        name,
        index,
        params: params.iter().map(|(_, ty)| *ty).collect(),
        ret: returns.map(|(_, ty)| ty),
        visibility,
        mutability,
        work: 0,
    });
    frame
}

/// Fills the frame with up to `max_blocks_per_function` node blocks, wraps
/// arithmetic runs in unchecked, assigns the named return, and appends the
/// state-logging epilogue. Also finalizes the frame's work estimate.
pub fn fill_function(ctx: &mut GenContext, mut frame: FunctionDecl) -> FunctionDecl {
    ctx.begin_function(0);
    for (name, ty) in &frame.params {
        ctx.declare_local(name, *ty);
    }
    if let Some((name, ty)) = &frame.returns {
        ctx.declare_local(name, *ty);
    }
    let fn_index = ctx
        .fn_syms
        .iter()
        .position(|f| f.name == frame.name)
        .expect("frame registered");

    let mut builder = FnBuilder {
        fn_index,
        mutability: frame.mutability,
        loop_multiplier: 1,
    };
    let n_blocks = ctx.prng.range(1, ctx.cfg.max_blocks_per_function.max(1));
    for _ in 0..n_blocks {
        ctx.push_region_weights();
        let n_nodes = ctx.prng.range(1, ctx.cfg.max_nodes_per_block.max(1));
        let stmts = builder.gen_nodes(ctx, n_nodes);
        ctx.pop_region_weights();
        frame.body.push(Block {
            stmts: wrap_unchecked_runs(stmts),
        });
    }
    if let Some((ret_name, ret_ty)) = frame.returns.clone() {
        ctx.usage.reset();
        ctx.usage.mark_plain(&ret_name);
        let depth = ctx.prng.range(1, ctx.cfg.max_expr_depth.max(1));
        let policy = builder.policy(ctx);
        let value = gen_arith_expr(ctx, ret_ty, depth, &policy);
        frame.body.push(Block {
            stmts: wrap_unchecked_runs(vec![Stmt::Assign {
                target: ret_name,
                op: AssignOp::Assign,
                value,
            }]),
        });
    }
    if frame.mutability.can_write_state() {
        frame.body.push(Block {
            stmts: append_state_log(ctx),
        });
    }
    let work = function_work(&frame, ctx);
    ctx.fn_syms[fn_index].work = work;
    frame
}

/// Epilogue: every state variable logged in declaration order, then each
/// array as (id, length) followed by a bounded element dump.
pub fn append_state_log(ctx: &GenContext) -> Vec<Stmt> {
    let mut stmts = Vec::new();
    let mut id = 0u64;
    for sv in &ctx.state_syms {
        let (event, id_ty) = match sv.ty {
            Ty::Uint256 => ("LogU", Ty::Uint256),
            Ty::Int256 => ("LogI", Ty::Uint256),
        };
        stmts.push(Stmt::EmitLog {
            event: event.to_string(),
            args: vec![
                Expr::IntLit(id_ty, Literal::unsigned(id)),
                Expr::VarRef(sv.name.clone()),
            ],
        });
        id += 1;
    }
    for a in &ctx.array_syms {
        stmts.push(Stmt::EmitLog {
            event: "LogU".to_string(),
            args: vec![
                Expr::IntLit(Ty::Uint256, Literal::unsigned(id)),
                Expr::ArrayLen(a.name.clone()),
            ],
        });
        stmts.push(Stmt::ArrayLogLoop {
            array: a.name.clone(),
            event: "LogU".to_string(),
            id,
            cap: ARRAY_DUMP_CAP,
            counter: GenContext::counter_name(1),
        });
        id += 1;
    }
    stmts
}

pub const ARRAY_DUMP_CAP: u64 = 8;

/// Groups maximal runs of consecutive arithmetic-bearing statements
/// (assignments and array operations) under a single unchecked wrapper.
/// Declarations stay outside: their initializers are literals, and an
/// unchecked block is a scope that would swallow them.
pub fn wrap_unchecked_runs(stmts: Vec<Stmt>) -> Vec<Stmt> {
    let mut out = Vec::new();
    let mut run = Vec::new();
    for s in stmts {
        if matches!(s, Stmt::Assign { .. } | Stmt::ArrayOp { .. }) {
            run.push(s);
        } else {
            if !run.is_empty() {
                out.push(Stmt::Unchecked(std::mem::take(&mut run)));
            }
            out.push(s);
        }
    }
    if !run.is_empty() {
        out.push(Stmt::Unchecked(run));
    }
    out
}

struct FnBuilder {
    fn_index: usize,
    mutability: Mutability,
    loop_multiplier: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum NodeKind {
    LocalDecl,
    Assign,
    Conditional,
    Loop,
    Yul,
    ArrayOp,
}

impl FnBuilder {
    fn policy(&self, ctx: &GenContext) -> ExprPolicy {
        let mut p = ExprPolicy::for_mutability(self.mutability, self.fn_index);
        p.loop_multiplier = self.loop_multiplier;
        // Counters are in the local pool but never mutable; inc/dec of state
        // is fine where writes are allowed.
        let _ = ctx;
        p
    }

    fn gen_nodes(&mut self, ctx: &mut GenContext, n: u64) -> Vec<Stmt> {
        let mut stmts = Vec::new();
        for _ in 0..n {
            if let Some(s) = self.gen_node(ctx) {
                stmts.push(s);
            }
        }
        stmts
    }

    /// Draws statement kinds until one is constructible; kinds decline when
    /// their preconditions fail (no arrays, depth exhausted, ...).
    fn gen_node(&mut self, ctx: &mut GenContext) -> Option<Stmt> {
        let w = ctx.cfg.stmt_weights.clone();
        for _ in 0..8 {
            let depth_ok = ctx.cond_loop_depth < ctx.cfg.max_cond_loop_depth;
            let menu = [
                (NodeKind::LocalDecl, w.local_decl),
                (NodeKind::Assign, w.assign),
                (
                    NodeKind::Conditional,
                    if depth_ok { w.conditional } else { 0.0 },
                ),
                (NodeKind::Loop, if depth_ok { w.for_loop } else { 0.0 }),
                (
                    NodeKind::Yul,
                    if self.mutability.can_write_state() {
                        w.yul_block
                    } else {
                        0.0
                    },
                ),
                (
                    NodeKind::ArrayOp,
                    if self.mutability.can_write_state() && !ctx.array_syms.is_empty() {
                        w.array_op
                    } else {
                        0.0
                    },
                ),
            ];
            if menu.iter().all(|(_, w)| *w <= 0.0) {
                return None;
            }
            let kind = ctx.pick_weighted(&menu);
            let built = match kind {
                NodeKind::LocalDecl => self.gen_local_decl(ctx),
                NodeKind::Assign => self.gen_assign(ctx),
                NodeKind::Conditional => self.gen_conditional(ctx),
                NodeKind::Loop => self.gen_loop(ctx),
                NodeKind::Yul => Some(self.gen_yul_block(ctx)),
                NodeKind::ArrayOp => self.gen_array_op(ctx),
            };
            if built.is_some() {
                return built;
            }
        }
        None
    }

    /// Declaration with a literal initializer. When one slot of live-local
    /// budget remains, the declaration sometimes moves into a bare block so
    /// its slot frees up immediately.
    fn gen_local_decl(&mut self, ctx: &mut GenContext) -> Option<Stmt> {
        if !ctx.can_declare_local() {
            return None;
        }
        let last_slot = ctx.live_locals() + 1 == ctx.cfg.max_live_locals;
        let name = ctx.fresh_local_name();
        let ty = draw_ty(ctx);
        let init = Expr::IntLit(ty, draw_literal(ctx, ty));
        if last_slot && ctx.prng.chance(0.5) {
            ctx.enter_scope();
            ctx.declare_local(&name, ty);
            let mut inner = vec![Stmt::LocalDecl { name, ty, init }];
            if let Some(assign) = self.gen_assign(ctx) {
                inner.push(assign);
            }
            ctx.exit_scope();
            Some(Stmt::BareBlock(wrap_unchecked_runs(inner)))
        } else {
            ctx.declare_local(&name, ty);
            Some(Stmt::LocalDecl { name, ty, init })
        }
    }

    fn gen_assign(&mut self, ctx: &mut GenContext) -> Option<Stmt> {
        let mut targets: Vec<(String, Ty)> = ctx
            .visible_locals()
            .into_iter()
            .map(|l| (l.name, l.ty))
            .collect();
        if self.mutability.can_write_state() {
            for sv in &ctx.state_syms {
                if !sv.is_constant {
                    targets.push((sv.name.clone(), sv.ty));
                }
            }
        }
        if targets.is_empty() {
            return None;
        }
        let (target, ty) = targets[ctx.prng.next_bounded(targets.len() as u64) as usize].clone();
        ctx.usage.reset();
        ctx.usage.mark_plain(&target);
        let op = ctx.pick_weighted(&[
            (AssignOp::Assign, 4.0),
            (AssignOp::AddAssign, 2.0),
            (AssignOp::SubAssign, 2.0),
            (AssignOp::MulAssign, 1.0),
        ]);
        let depth = ctx.prng.range(1, ctx.cfg.max_expr_depth.max(1));
        let policy = self.policy(ctx);
        let value = gen_arith_expr(ctx, ty, depth, &policy);
        Some(Stmt::Assign { target, op, value })
    }

    fn gen_conditional(&mut self, ctx: &mut GenContext) -> Option<Stmt> {
        ctx.usage.reset();
        let policy = self.policy(ctx);
        let cond = gen_condition(ctx, &policy);
        ctx.cond_loop_depth += 1;
        let n = ctx.prng.range(1, (ctx.cfg.max_nodes_per_block / 2).max(1));
        ctx.enter_scope();
        let then_block = wrap_unchecked_runs(self.gen_nodes(ctx, n));
        ctx.exit_scope();
        let else_block = if ctx.prng.chance(0.4) {
            let n = ctx.prng.range(1, (ctx.cfg.max_nodes_per_block / 2).max(1));
            ctx.enter_scope();
            let b = wrap_unchecked_runs(self.gen_nodes(ctx, n));
            ctx.exit_scope();
            Some(b)
        } else {
            None
        };
        ctx.cond_loop_depth -= 1;
        Some(Stmt::If {
            cond,
            then_block,
            else_block,
        })
    }

    /// Form I keeps the counter in the for-header; Form II declares it just
    /// before the loop, with both wrapped in a bare block. Same-depth loops
    /// share the counter name, which never escapes its block.
    fn gen_loop(&mut self, ctx: &mut GenContext) -> Option<Stmt> {
        if !ctx.can_declare_local() {
            // The counter occupies a stack slot for the loop's duration.
            return None;
        }
        let depth = ctx.cond_loop_depth + 1;
        let counter = GenContext::counter_name(depth);
        let bound = ctx
            .prng
            .range(ctx.cfg.loop_bound_range.lo, ctx.cfg.loop_bound_range.hi);
        ctx.cond_loop_depth += 1;
        ctx.counters.push(counter.clone());
        ctx.enter_scope();
        let saved = self.loop_multiplier;
        self.loop_multiplier = saved.saturating_mul(bound.max(1));
        let n = ctx.prng.range(1, (ctx.cfg.max_nodes_per_block / 2).max(1));
        let body = wrap_unchecked_runs(self.gen_nodes(ctx, n));
        self.loop_multiplier = saved;
        ctx.exit_scope();
        ctx.counters.pop();
        ctx.cond_loop_depth -= 1;
        let form_one = ctx.prng.chance(0.5);
        Some(if form_one {
            Stmt::ForLoopI {
                counter,
                bound,
                body,
            }
        } else {
            Stmt::ForLoopII {
                counter,
                bound,
                body,
            }
        })
    }

    fn gen_array_op(&mut self, ctx: &mut GenContext) -> Option<Stmt> {
        if ctx.array_syms.is_empty() {
            return None;
        }
        let idx = ctx.prng.next_bounded(ctx.array_syms.len() as u64) as usize;
        let array = ctx.array_syms[idx].name.clone();
        let kind = ctx.pick_weighted(&[(0u8, 4.0), (1u8, 3.0), (2u8, 3.0)]);
        let op = match kind {
            0 => {
                ctx.usage.reset();
                // The pushed expression must not read the array it grows.
                let hidden = ctx.array_syms.remove(idx);
                let depth = ctx.prng.range(1, ctx.cfg.max_expr_depth.max(1));
                let policy = self.policy(ctx);
                let e = gen_arith_expr(ctx, Ty::Uint256, depth, &policy);
                ctx.array_syms.insert(idx, hidden);
                ArrayOpKind::Push(e)
            }
            1 => ArrayOpKind::GuardedPop,
            _ => ArrayOpKind::GuardedIndexUpdate {
                index: ctx.prng.next_bounded(ARRAY_DUMP_CAP),
            },
        };
        Some(Stmt::ArrayOp { array, op })
    }

    // ---- Yul ----

    fn gen_yul_block(&mut self, ctx: &mut GenContext) -> Stmt {
        let scalar_slots: Vec<u64> = ctx.state_syms.iter().filter_map(|s| s.slot).collect();
        let mut yul = YulBuilder {
            lets: Vec::new(),
            committed: None,
            scalar_slots,
            solidity_locals: ctx
                .visible_locals()
                .iter()
                .map(|l| l.name.clone())
                .collect(),
        };
        let n = ctx.prng.range(0, 5);
        let stmts = yul.gen_nodes(ctx, n, self.loop_multiplier);
        Stmt::YulBlock(stmts)
    }
}

struct YulBuilder {
    lets: Vec<String>,
    /// Once a storage-write-return payload lands in a block, Solidity
    /// variable references are suppressed for the rest of it (and vice versa):
    /// the two strategies are mutually exclusive per region.
    committed: Option<PayloadKind>,
    scalar_slots: Vec<u64>,
    solidity_locals: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum YulNode {
    Let,
    Assign,
    Mstore,
    Sstore,
    If,
    For,
    FnDef,
    KeccakPair,
    StorageWriteReturn,
    SolvarRef,
}

impl YulBuilder {
    fn gen_nodes(&mut self, ctx: &mut GenContext, n: u64, multiplier: u64) -> Vec<YulStmt> {
        let mut out = Vec::new();
        for _ in 0..n {
            let weights = ctx.active_weights().clone();
            let swr_allowed = self.committed != Some(PayloadKind::YulSolvarRef);
            let solvar_allowed =
                self.committed != Some(PayloadKind::StorageWriteReturn) && !self.solidity_locals.is_empty();
            let menu = [
                (YulNode::Let, 2.0),
                (YulNode::Assign, if self.lets.is_empty() { 0.0 } else { 2.0 }),
                (YulNode::Mstore, 1.0),
                (YulNode::Sstore, 1.5),
                (YulNode::If, 1.0),
                (YulNode::For, if multiplier > 64 { 0.0 } else { 1.0 }),
                (YulNode::FnDef, 0.5),
                (YulNode::KeccakPair, weights.keccak_pair),
                (
                    YulNode::StorageWriteReturn,
                    if swr_allowed {
                        weights.storage_write_return
                    } else {
                        0.0
                    },
                ),
                (
                    YulNode::SolvarRef,
                    if solvar_allowed {
                        weights.yul_solvar_ref
                    } else {
                        0.0
                    },
                ),
            ];
            match ctx.pick_weighted(&menu) {
                YulNode::Let => {
                    if ctx.live_locals() + (self.lets.len() as u64) + 1 >= ctx.cfg.max_live_locals
                    {
                        continue;
                    }
                    let name = ctx.fresh_yul_name();
                    let value = self.gen_expr(ctx, 2);
                    self.lets.push(name.clone());
                    out.push(YulStmt::Let { name, value });
                }
                YulNode::Assign => {
                    let name =
                        self.lets[ctx.prng.next_bounded(self.lets.len() as u64) as usize].clone();
                    let value = self.gen_expr(ctx, 2);
                    out.push(YulStmt::Assign { name, value });
                }
                YulNode::Mstore => {
                    let addr = if ctx.prng.chance(0.5) { 0 } else { 32 };
                    let value = self.gen_expr(ctx, 1);
                    out.push(YulStmt::Mstore { addr, value });
                }
                YulNode::Sstore => {
                    let slot = match self.pick_slot(ctx) {
                        Some(s) => s,
                        None => continue,
                    };
                    let value = self.gen_expr(ctx, 2);
                    out.push(YulStmt::Sstore { slot, value });
                }
                YulNode::If => {
                    let cond = self.gen_expr(ctx, 1);
                    let n_body = 1 + ctx.prng.next_bounded(2);
                    let body = self.gen_simple_nodes(ctx, n_body);
                    out.push(YulStmt::If { cond, body });
                }
                YulNode::For => {
                    let counter = ctx.fresh_yul_name();
                    let bound = ctx.prng.range(1, 4);
                    self.lets.push(counter.clone());
                    let n_body = 1 + ctx.prng.next_bounded(2);
                    let body = self.gen_simple_nodes(ctx, n_body);
                    self.lets.pop();
                    out.push(YulStmt::For {
                        counter,
                        bound,
                        body,
                    });
                }
                YulNode::FnDef => {
                    let name = ctx.fresh_yul_fn_name();
                    let op = ctx.pick_weighted(&[
                        (YulOp::Add, 2.0),
                        (YulOp::Mul, 2.0),
                        (YulOp::Xor, 1.0),
                        (YulOp::And, 1.0),
                    ]);
                    out.push(YulStmt::FnDef {
                        name: name.clone(),
                        params: vec!["a".into(), "b".into()],
                        ret: Some("r".into()),
                        body: vec![YulStmt::Assign {
                            name: "r".into(),
                            value: YulExpr::Op {
                                op,
                                args: vec![YulExpr::Ref("a".into()), YulExpr::Ref("b".into())],
                            },
                        }],
                    });
                    if ctx.live_locals() + (self.lets.len() as u64) < ctx.cfg.max_live_locals {
                        let result = ctx.fresh_yul_name();
                        let args = vec![self.gen_expr(ctx, 1), self.gen_expr(ctx, 1)];
                        self.lets.push(result.clone());
                        out.push(YulStmt::Let {
                            name: result,
                            value: YulExpr::CallExpr { name, args },
                        });
                    }
                }
                YulNode::KeccakPair => {
                    let payload = inject_keccak_pair(ctx, &self.scalar_slots);
                    if self.committed.is_none() {
                        self.committed = Some(PayloadKind::KeccakPair);
                    }
                    out.extend(payload.stmts);
                }
                YulNode::StorageWriteReturn => {
                    let payload = inject_storage_write_return(ctx, &self.scalar_slots);
                    self.committed = Some(PayloadKind::StorageWriteReturn);
                    out.extend(payload.stmts);
                }
                YulNode::SolvarRef => {
                    self.committed = Some(PayloadKind::YulSolvarRef);
                    out.extend(self.gen_solvar_payload(ctx));
                }
            }
        }
        out
    }

    fn gen_simple_nodes(&mut self, ctx: &mut GenContext, n: u64) -> Vec<YulStmt> {
        let mut out = Vec::new();
        for _ in 0..n {
            match ctx.pick_weighted(&[(0u8, 2.0), (1u8, 2.0), (2u8, 1.0)]) {
                0 if !self.lets.is_empty() => {
                    let name =
                        self.lets[ctx.prng.next_bounded(self.lets.len() as u64) as usize].clone();
                    let value = self.gen_expr(ctx, 1);
                    out.push(YulStmt::Assign { name, value });
                }
                1 => {
                    let addr = if ctx.prng.chance(0.5) { 0 } else { 32 };
                    let value = self.gen_expr(ctx, 1);
                    out.push(YulStmt::Mstore { addr, value });
                }
                _ => {
                    if let Some(slot) = self.pick_slot(ctx) {
                        let value = self.gen_expr(ctx, 1);
                        out.push(YulStmt::Sstore { slot, value });
                    }
                }
            }
        }
        out
    }

    /// Reads and writes a Solidity local from inside the assembly block —
    /// exactly the interaction that forces the legacy pipeline to leave the
    /// block unoptimized.
    fn gen_solvar_payload(&mut self, ctx: &mut GenContext) -> Vec<YulStmt> {
        let var = self.solidity_locals
            [ctx.prng.next_bounded(self.solidity_locals.len() as u64) as usize]
            .clone();
        let tmp = ctx.fresh_yul_name();
        let delta = 1 + ctx.prng.next_bounded(16);
        self.lets.push(tmp.clone());
        vec![
            YulStmt::Let {
                name: tmp.clone(),
                value: YulExpr::Ref(var.clone()),
            },
            YulStmt::Assign {
                name: var,
                value: YulExpr::Op {
                    op: YulOp::Add,
                    args: vec![YulExpr::Ref(tmp), YulExpr::Lit(delta)],
                },
            },
        ]
    }

    fn pick_slot(&mut self, ctx: &mut GenContext) -> Option<SlotRef> {
        if self.scalar_slots.is_empty() {
            return Some(SlotRef::Literal(crate::policies::OUT_OF_LAYOUT_SLOT));
        }
        let slot = self.scalar_slots[ctx.prng.next_bounded(self.scalar_slots.len() as u64) as usize];
        Some(SlotRef::Literal(slot))
    }

    fn gen_expr(&mut self, ctx: &mut GenContext, depth: u64) -> YulExpr {
        if depth == 0 {
            return self.gen_leaf(ctx);
        }
        match ctx.pick_weighted(&[(0u8, 3.0), (1u8, 2.0)]) {
            0 => self.gen_leaf(ctx),
            _ => {
                let op = ctx.pick_weighted(&[
                    (YulOp::Add, 3.0),
                    (YulOp::Sub, 2.0),
                    (YulOp::Mul, 2.0),
                    (YulOp::Div, 1.0),
                    (YulOp::Mod, 1.0),
                    (YulOp::And, 1.0),
                    (YulOp::Or, 1.0),
                    (YulOp::Xor, 1.0),
                    (YulOp::Lt, 0.5),
                    (YulOp::Gt, 0.5),
                    (YulOp::Eq, 0.5),
                    (YulOp::IsZero, 0.5),
                ]);
                let args = (0..op.arity())
                    .map(|_| self.gen_expr(ctx, depth - 1))
                    .collect();
                YulExpr::Op { op, args }
            }
        }
    }

    fn gen_leaf(&mut self, ctx: &mut GenContext) -> YulExpr {
        let solvar_ok = self.committed != Some(PayloadKind::StorageWriteReturn);
        let menu = [
            (0u8, 3.0), // literal
            (1u8, if self.lets.is_empty() { 0.0 } else { 3.0 }),
            (2u8, if solvar_ok { 1.5 } else { 0.0 }), // sload of scalar slot
            (3u8, 1.0),                               // mload of scratch
        ];
        match ctx.pick_weighted(&menu) {
            0 => YulExpr::Lit(ctx.prng.next_bounded(1 << 32)),
            1 => YulExpr::Ref(
                self.lets[ctx.prng.next_bounded(self.lets.len() as u64) as usize].clone(),
            ),
            2 => match self.pick_slot(ctx) {
                Some(slot) => YulExpr::Sload(slot),
                None => YulExpr::Lit(ctx.prng.next_bounded(1 << 32)),
            },
            _ => YulExpr::Mload(if ctx.prng.chance(0.5) { 0 } else { 32 }),
        }
    }
}

// ---- work estimation ----

/// Static per-function work estimate: roughly proportional to gas, used to
/// refuse calls whose loop-scaled cost would explode execution time.
pub fn function_work(f: &FunctionDecl, ctx: &GenContext) -> u64 {
    let mut total: u64 = 2;
    for block in &f.body {
        for s in &block.stmts {
            total = total.saturating_add(stmt_work(s, ctx));
        }
    }
    total
}

fn stmt_work(s: &Stmt, ctx: &GenContext) -> u64 {
    match s {
        Stmt::LocalDecl { init, .. } => 1 + expr_work(init, ctx),
        Stmt::Assign { value, .. } => 2 + expr_work(value, ctx),
        Stmt::If {
            cond,
            then_block,
            else_block,
        } => {
            let mut w = 1 + expr_work(cond, ctx);
            w += then_block.iter().map(|s| stmt_work(s, ctx)).sum::<u64>();
            if let Some(e) = else_block {
                w += e.iter().map(|s| stmt_work(s, ctx)).sum::<u64>();
            }
            w
        }
        Stmt::ForLoopI { bound, body, .. } | Stmt::ForLoopII { bound, body, .. } => {
            let inner: u64 = body.iter().map(|s| stmt_work(s, ctx)).sum();
            2 + bound.saturating_mul(inner + 1)
        }
        Stmt::YulBlock(yul) => yul.iter().map(yul_work).sum(),
        Stmt::ArrayOp { op, .. } => match op {
            ArrayOpKind::Push(e) => 8 + expr_work(e, ctx),
            ArrayOpKind::GuardedPop => 6,
            ArrayOpKind::GuardedIndexUpdate { .. } => 8,
        },
        Stmt::Unchecked(inner) | Stmt::BareBlock(inner) => {
            inner.iter().map(|s| stmt_work(s, ctx)).sum()
        }
        Stmt::EmitLog { .. } => 4,
        Stmt::ArrayLogLoop { cap, .. } => 4 + cap * 6,
        Stmt::Placeholder => 0,
    }
}

fn yul_work(s: &YulStmt) -> u64 {
    match s {
        YulStmt::Let { .. } | YulStmt::Assign { .. } | YulStmt::Mstore { .. } => 1,
        YulStmt::Sstore { .. } => 6,
        YulStmt::If { body, .. } => 1 + body.iter().map(yul_work).sum::<u64>(),
        YulStmt::For { bound, body, .. } => {
            2 + bound.saturating_mul(body.iter().map(yul_work).sum::<u64>() + 1)
        }
        YulStmt::FnDef { body, .. } => body.iter().map(yul_work).sum(),
        YulStmt::Call { .. } => 3,
        YulStmt::HaltReturn | YulStmt::HaltStop => 1,
    }
}

fn expr_work(e: &Expr, ctx: &GenContext) -> u64 {
    let mut total = 0u64;
    crate::validate::walk_expr(e, &mut |x| {
        total = total.saturating_add(match x {
            Expr::Call { callee, .. } => {
                5 + ctx
                    .fn_syms
                    .iter()
                    .find(|f| &f.name == callee)
                    .map(|f| f.work)
                    .unwrap_or(0)
            }
            Expr::Binary { .. } | Expr::DivGuard(_) => 1,
            Expr::IndexGuard { .. } => 3,
            Expr::IncDec { .. } => 2,
            _ => 0,
        });
    });
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GenConfig;
    use crate::context::{ArraySym, StateSym};

    fn ready_ctx(seed: u64) -> GenContext {
        let mut c = GenContext::new(seed, GenConfig::default());
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
        c.array_syms.push(ArraySym {
            name: "arr0".into(),
            init_len: 3,
            slot: 2,
        });
        c
    }

    #[test]
    fn frames_only_modify_state_when_allowed() {
        let mut c = ready_ctx(3);
        for i in 0..200 {
            let frame = gen_function_frame(&mut c, i);
            if !frame.applied_modifiers.is_empty() {
                assert!(frame.mutability.can_write_state());
            }
        }
    }

    #[test]
    fn visibility_frequencies_near_uniform() {
        let mut c = ready_ctx(11);
        let mut counts = [0u64; 3];
        for i in 0..1000 {
            let f = gen_function_frame(&mut c, i);
            match f.visibility {
                Visibility::Public => counts[0] += 1,
                Visibility::External => counts[1] += 1,
                Visibility::Internal => counts[2] += 1,
            }
        }
        for n in counts {
            let freq = n as f64 / 1000.0;
            assert!((freq - 1.0 / 3.0).abs() < 0.1 / 3.0 * 3.0, "freq {freq}");
        }
    }

    #[test]
    fn pure_frames_fill_without_state() {
        let mut c = ready_ctx(5);
        for i in 0..40 {
            let mut frame = gen_function_frame(&mut c, i);
            frame.mutability = Mutability::Pure;
            frame.applied_modifiers.clear();
            c.fn_syms[i].mutability = Mutability::Pure;
            let filled = fill_function(&mut c, frame);
            crate::validate::walk_stmts(
                &filled.body.iter().flat_map(|b| b.stmts.clone()).collect::<Vec<_>>(),
                &mut |s| {
                    assert!(
                        !matches!(
                            s,
                            Stmt::YulBlock(_) | Stmt::ArrayOp { .. } | Stmt::EmitLog { .. }
                        ),
                        "state-touching stmt in pure fn: {s:?}"
                    );
                },
            );
        }
    }

    #[test]
    fn zero_nodes_config_yields_epilogue_only() {
        let mut c = ready_ctx(9);
        c.cfg.max_nodes_per_block = 0;
        c.cfg.max_blocks_per_function = 0;
        let mut frame = gen_function_frame(&mut c, 0);
        frame.mutability = Mutability::Default;
        frame.returns = None;
        frame.applied_modifiers.clear();
        c.fn_syms[0].mutability = Mutability::Default;
        c.fn_syms[0].ret = None;
        let filled = fill_function(&mut c, frame);
        // One generated block (min draw 1 with max 0 clamps to 1 node that
        // may decline) plus the epilogue; epilogue must log both state vars
        // and the array.
        let all: Vec<&Stmt> = filled.body.iter().flat_map(|b| &b.stmts).collect();
        let emits = all
            .iter()
            .filter(|s| matches!(s, Stmt::EmitLog { .. }))
            .count();
        assert_eq!(emits, 3); // sv0, sv1, arr0 length
        assert!(all.iter().any(|s| matches!(s, Stmt::ArrayLogLoop { .. })));
    }

    #[test]
    fn unchecked_wrapping_groups_runs() {
        let decl = Stmt::LocalDecl {
            name: "v0".into(),
            ty: Ty::Uint256,
            init: Expr::lit(Ty::Uint256, 1),
        };
        let assign = |t: &str| Stmt::Assign {
            target: t.into(),
            op: AssignOp::AddAssign,
            value: Expr::lit(Ty::Uint256, 2),
        };
        let out = wrap_unchecked_runs(vec![
            decl.clone(),
            assign("a"),
            assign("b"),
            decl.clone(),
            assign("c"),
        ]);
        assert_eq!(out.len(), 4);
        assert!(matches!(out[0], Stmt::LocalDecl { .. }));
        match &out[1] {
            Stmt::Unchecked(inner) => assert_eq!(inner.len(), 2),
            other => panic!("expected unchecked run, got {other:?}"),
        }
        assert!(matches!(out[2], Stmt::LocalDecl { .. }));
        assert!(matches!(&out[3], Stmt::Unchecked(inner) if inner.len() == 1));
    }

    #[test]
    fn loop_counters_reuse_depth_names() {
        let mut c = ready_ctx(17);
        let mut frame = gen_function_frame(&mut c, 0);
        frame.mutability = Mutability::Default;
        c.fn_syms[0].mutability = Mutability::Default;
        let filled = fill_function(&mut c, frame);
        let mut depth1_counters = std::collections::BTreeSet::new();
        let stmts: Vec<Stmt> = filled.body.iter().flat_map(|b| b.stmts.clone()).collect();
        for s in &stmts {
            if let Stmt::ForLoopI { counter, .. } | Stmt::ForLoopII { counter, .. } = s {
                depth1_counters.insert(counter.clone());
            }
        }
        for c in &depth1_counters {
            assert_eq!(c, "i1");
        }
    }
}
