//! Static validators: every compliance/consistency rule asserted directly on
//! the tree. Violations are data, not failures — generation is expected to
//! produce zero of them, and tests inject single faults to check that the
//! matching rule fires.

use crate::ast::*;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub path: String,
    pub fragment: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] at {}: {}", self.rule, self.path, self.fragment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExprTy {
    U,
    I,
    Bool,
}

impl ExprTy {
    fn from_ty(ty: Ty) -> ExprTy {
        match ty {
            Ty::Uint256 => ExprTy::U,
            Ty::Int256 => ExprTy::I,
        }
    }

    fn is_numeric(self) -> bool {
        !matches!(self, ExprTy::Bool)
    }
}

#[derive(Clone, Copy)]
struct FnInfo<'a> {
    visibility: Visibility,
    mutability: Mutability,
    ret: Option<Ty>,
    index: usize,
    params: &'a [(String, Ty)],
}

struct Checker<'a> {
    program: &'a Program,
    violations: Vec<Violation>,
    state: BTreeMap<&'a str, (Ty, bool)>, // name -> (ty, is_constant)
    arrays: BTreeSet<&'a str>,
    array_slots: BTreeSet<u64>,
    fns: BTreeMap<&'a str, FnInfo<'a>>,
    events: BTreeMap<&'a str, &'a [(String, Ty)]>,
    // Per-walk context.
    scopes: Vec<Vec<(String, Ty)>>,
    counters: Vec<String>,
    in_modifier: bool,
    mutability: Mutability,
    in_unchecked: bool,
}

pub fn validate(program: &Program) -> Vec<Violation> {
    let mut c = Checker {
        program,
        violations: Vec::new(),
        state: program
            .state_vars
            .iter()
            .map(|sv| (sv.name.as_str(), (sv.ty, sv.is_constant)))
            .collect(),
        arrays: program.arrays.iter().map(|a| a.name.as_str()).collect(),
        array_slots: program.array_slots().into_iter().map(|(_, s)| s).collect(),
        fns: program
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                (
                    f.name.as_str(),
                    FnInfo {
                        visibility: f.visibility,
                        mutability: f.mutability,
                        ret: f.returns.as_ref().map(|(_, ty)| *ty),
                        index: i,
                        params: &f.params,
                    },
                )
            })
            .collect(),
        events: program
            .events
            .iter()
            .map(|e| (e.name.as_str(), e.params.as_slice()))
            .collect(),
        scopes: Vec::new(),
        counters: Vec::new(),
        in_modifier: false,
        mutability: Mutability::Default,
        in_unchecked: false,
    };
    c.check_top_level();
    for (i, m) in program.modifiers.iter().enumerate() {
        c.check_modifier(m, &format!("modifiers[{i}]"));
    }
    for (i, f) in program.functions.iter().enumerate() {
        c.check_function(f, &format!("functions[{i}]"));
    }
    c.check_call_graph();
    c.violations
}

/// Maximum number of simultaneously in-scope local variables (params, the
/// named return, declared locals, loop counters and Yul lets), accounting
/// for scope exits, over all program points of `fn_`.
pub fn max_live_locals(fn_: &FunctionDecl) -> u64 {
    let base = fn_.params.len() as u64 + if fn_.returns.is_some() { 1 } else { 0 };
    let mut max = base;
    let mut live = base;
    for block in &fn_.body {
        live_walk(&block.stmts, &mut live, &mut max);
    }
    max
}

fn live_walk(stmts: &[Stmt], live: &mut u64, max: &mut u64) {
    for s in stmts {
        match s {
            Stmt::LocalDecl { .. } => {
                *live += 1;
                *max = (*max).max(*live);
            }
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                scoped_walk(then_block, live, max);
                if let Some(e) = else_block {
                    scoped_walk(e, live, max);
                }
            }
            Stmt::ForLoopI { body, .. } | Stmt::ForLoopII { body, .. } => {
                // Counter is live for the duration of the loop (Form II's
                // enclosing bare block has the same extent).
                *live += 1;
                *max = (*max).max(*live);
                scoped_walk(body, live, max);
                *live -= 1;
            }
            Stmt::ArrayLogLoop { .. } => {
                *max = (*max).max(*live + 1);
            }
            Stmt::Unchecked(inner) | Stmt::BareBlock(inner) => {
                scoped_walk(inner, live, max);
            }
            Stmt::YulBlock(yul) => {
                let lets = max_yul_lets(yul);
                *max = (*max).max(*live + lets);
            }
            _ => {}
        }
    }
}

fn scoped_walk(stmts: &[Stmt], live: &mut u64, max: &mut u64) {
    let before = *live;
    live_walk(stmts, live, max);
    *live = before;
}

fn max_yul_lets(stmts: &[YulStmt]) -> u64 {
    let mut live = 0u64;
    let mut max = 0u64;
    for s in stmts {
        match s {
            YulStmt::Let { .. } => {
                live += 1;
                max = max.max(live);
            }
            YulStmt::If { body, .. } | YulStmt::For { body, .. } => {
                max = max.max(live + max_yul_lets(body) + 1);
            }
            YulStmt::FnDef { .. } => {}
            _ => {}
        }
    }
    max
}

impl<'a> Checker<'a> {
    fn enter_scope(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn exit_scope(&mut self) {
        self.scopes.pop();
    }

    fn fail(&mut self, rule: &'static str, path: &str, fragment: impl std::fmt::Display) {
        let mut text = fragment.to_string();
        if text.len() > 120 {
            text.truncate(120);
            text.push('…');
        }
        self.violations.push(Violation {
            rule,
            path: path.to_string(),
            fragment: text,
        });
    }

    fn check_top_level(&mut self) {
        let p = self.program;
        let ok_pragma = {
            let parts: Vec<Option<u64>> = p
                .pragma_floor
                .split('.')
                .map(|x| x.parse::<u64>().ok())
                .collect();
            matches!(parts.as_slice(), [Some(maj), Some(min), Some(_)] if (*maj, *min) >= (0, 8))
        };
        if !ok_pragma {
            self.fail("pragma-floor", "pragma", &p.pragma_floor);
        }
        if p.events.is_empty() {
            self.fail("events-nonempty", "events", "no event declarations");
        }
        let mut seen = BTreeSet::new();
        let names = p
            .events
            .iter()
            .map(|e| e.name.as_str())
            .chain(p.state_vars.iter().map(|s| s.name.as_str()))
            .chain(p.arrays.iter().map(|a| a.name.as_str()))
            .chain(p.modifiers.iter().map(|m| m.name.as_str()))
            .chain(p.functions.iter().map(|f| f.name.as_str()));
        for n in names {
            if !seen.insert(n) {
                self.fail("unique-identifiers", "top-level", n);
            }
        }
        for (i, sv) in p.state_vars.iter().enumerate() {
            if !sv.init.fits(sv.ty) {
                self.fail(
                    "state-var-init-range",
                    &format!("state_vars[{i}]"),
                    sv.init.to_decimal(),
                );
            }
        }
        for (i, a) in p.arrays.iter().enumerate() {
            for (j, e) in a.init_elems.iter().enumerate() {
                if !e.fits(Ty::Uint256) {
                    self.fail(
                        "array-elem-range",
                        &format!("arrays[{i}].init[{j}]"),
                        e.to_decimal(),
                    );
                }
            }
        }
    }

    fn check_modifier(&mut self, m: &'a ModifierDecl, path: &str) {
        self.in_modifier = true;
        self.mutability = Mutability::Default;
        self.scopes = vec![Vec::new()];
        self.counters.clear();
        self.in_unchecked = false;

        let top_level_placeholders = m
            .body
            .iter()
            .filter(|s| matches!(s, Stmt::Placeholder))
            .count() as u64;
        let total = count_placeholders(&m.body);
        if total != 1 || m.placeholder_count != 1 || top_level_placeholders != total {
            self.fail(
                "modifier-placeholder",
                path,
                format!("placeholders: {total} (declared {})", m.placeholder_count),
            );
        }
        self.check_stmts(&m.body, path);
        self.in_modifier = false;
    }

    fn check_function(&mut self, f: &'a FunctionDecl, path: &str) {
        self.in_modifier = false;
        self.mutability = f.mutability;
        self.counters.clear();
        self.in_unchecked = false;
        let mut top = Vec::new();
        for (name, ty) in &f.params {
            top.push((name.clone(), *ty));
        }
        if let Some((name, ty)) = &f.returns {
            top.push((name.clone(), *ty));
        }
        self.scopes = vec![top];

        for m in &f.applied_modifiers {
            if !self.program.modifiers.iter().any(|d| &d.name == m) {
                self.fail("modifier-declared", path, m);
            }
        }
        if !f.applied_modifiers.is_empty() && !f.mutability.can_write_state() {
            self.fail(
                "modifier-on-restricted",
                path,
                format!("{} function with modifier", f.mutability.keyword().unwrap_or("?")),
            );
        }
        if max_live_locals(f) > crate::config::LIVE_LOCALS_HARD_CAP {
            self.fail(
                "live-locals-cap",
                path,
                format!("max live locals {}", max_live_locals(f)),
            );
        }
        for (i, block) in f.body.iter().enumerate() {
            self.check_stmts(&block.stmts, &format!("{path}.body[{i}]"));
        }
        if let Some((ret_name, _)) = &f.returns {
            if !has_unconditional_assign(&f.body, ret_name) {
                self.fail("return-assigned", path, ret_name);
            }
        }
    }

    fn check_stmts(&mut self, stmts: &'a [Stmt], path: &str) {
        for (i, s) in stmts.iter().enumerate() {
            self.check_stmt(s, &format!("{path}.stmts[{i}]"));
        }
    }

    fn check_stmt(&mut self, s: &'a Stmt, path: &str) {
        match s {
            Stmt::Placeholder => {
                if !self.in_modifier {
                    self.fail("placeholder-outside-modifier", path, "_;");
                }
            }
            Stmt::LocalDecl { name, ty, init } => {
                if self.in_modifier {
                    self.fail("modifier-scope", path, format!("local {name}"));
                }
                if self.resolve_local(name).is_some()
                    || self.counters.iter().any(|c| c == name)
                {
                    self.fail("local-shadowing", path, name);
                }
                self.check_statement_usage(s, path);
                if !self.in_unchecked && contains_arith(init) {
                    self.fail("overflow-unchecked", path, format!("decl {name}"));
                }
                if let Some(t) = self.check_expr(init, path) {
                    if t != ExprTy::from_ty(*ty) {
                        self.fail("type-consistency", path, format!("decl {name}"));
                    }
                }
                self.scopes
                    .last_mut()
                    .expect("scope stack")
                    .push((name.clone(), *ty));
            }
            Stmt::Assign { target, op, value } => {
                self.check_statement_usage(s, path);
                let target_ty = self.check_assign_target(target, path);
                let arith = *op != AssignOp::Assign || contains_arith(value);
                if !self.in_unchecked && arith {
                    self.fail("overflow-unchecked", path, format!("{target} {}", op.symbol()));
                }
                if let (Some(tt), Some(vt)) = (target_ty, self.check_expr(value, path)) {
                    if tt != vt {
                        self.fail("type-consistency", path, format!("assign {target}"));
                    }
                }
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                self.check_condition(cond, path);
                self.enter_scope();
                self.check_stmts(then_block, &format!("{path}.then"));
                self.exit_scope();
                if let Some(e) = else_block {
                    self.enter_scope();
                    self.check_stmts(e, &format!("{path}.else"));
                    self.exit_scope();
                }
            }
            Stmt::ForLoopI { counter, bound, body }
            | Stmt::ForLoopII { counter, bound, body } => {
                if *bound < 1 {
                    self.fail("loop-bound", path, bound);
                }
                self.enter_scope();
                self.counters.push(counter.clone());
                self.check_stmts(body, &format!("{path}.body"));
                self.check_counter_immutable(counter, body, path);
                self.counters.pop();
                self.exit_scope();
            }
            Stmt::YulBlock(yul) => {
                if self.in_modifier {
                    self.fail("modifier-scope", path, "assembly block");
                }
                if self.mutability == Mutability::Pure {
                    self.fail("pure-restriction", path, "assembly block");
                }
                self.check_yul_block(yul, path);
            }
            Stmt::ArrayOp { array, op } => {
                self.check_array_known(array, path);
                if !self.mutability.can_write_state() {
                    self.fail(
                        if self.mutability == Mutability::Pure {
                            "pure-restriction"
                        } else {
                            "view-restriction"
                        },
                        path,
                        format!("array op on {array}"),
                    );
                }
                if let ArrayOpKind::Push(e) = op {
                    self.check_statement_usage(s, path);
                    if !self.in_unchecked && contains_arith(e) {
                        self.fail("overflow-unchecked", path, format!("push on {array}"));
                    }
                    if reads_array(e, array) {
                        self.fail("array-grow-read", path, array);
                    }
                    if let Some(t) = self.check_expr(e, path) {
                        if t != ExprTy::U {
                            self.fail("type-consistency", path, format!("push on {array}"));
                        }
                    }
                }
                if matches!(op, ArrayOpKind::GuardedIndexUpdate { .. }) && !self.in_unchecked {
                    self.fail("overflow-unchecked", path, format!("{array}[k]++"));
                }
            }
            Stmt::Unchecked(inner) => {
                if self.in_unchecked {
                    self.fail("unchecked-nesting", path, "nested unchecked");
                }
                let was = self.in_unchecked;
                self.in_unchecked = true;
                self.enter_scope();
                self.check_stmts(inner, &format!("{path}.unchecked"));
                self.exit_scope();
                self.in_unchecked = was;
            }
            Stmt::EmitLog { event, args } => {
                if self.mutability != Mutability::Default
                    && self.mutability != Mutability::Payable
                {
                    self.fail(
                        if self.mutability == Mutability::Pure {
                            "pure-restriction"
                        } else {
                            "view-restriction"
                        },
                        path,
                        format!("emit {event}"),
                    );
                }
                match self.events.get(event.as_str()) {
                    None => self.fail("event-unknown", path, event),
                    Some(params) => {
                        if params.len() != args.len() {
                            self.fail("emit-args", path, event);
                        } else {
                            let expected: Vec<ExprTy> = params
                                .iter()
                                .map(|(_, ty)| ExprTy::from_ty(*ty))
                                .collect();
                            for (arg, want) in args.iter().zip(expected) {
                                if contains_incdec(arg) {
                                    self.fail("emit-args", path, "side effect in emit");
                                }
                                if let Some(t) = self.check_expr(arg, path) {
                                    if t != want {
                                        self.fail("emit-args", path, event);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Stmt::ArrayLogLoop { array, event, .. } => {
                self.check_array_known(array, path);
                if !self.events.contains_key(event.as_str()) {
                    self.fail("event-unknown", path, event);
                }
                if !self.mutability.can_write_state() {
                    self.fail("view-restriction", path, "array log loop");
                }
            }
            Stmt::BareBlock(inner) => {
                self.enter_scope();
                self.check_stmts(inner, &format!("{path}.block"));
                self.exit_scope();
            }
        }
    }

    fn check_assign_target(&mut self, target: &str, path: &str) -> Option<ExprTy> {
        if self.counters.iter().any(|c| c == target) {
            self.fail("loop-counter-mutation", path, target);
            return Some(ExprTy::U);
        }
        if let Some(ty) = self.resolve_local(target) {
            return Some(ExprTy::from_ty(ty));
        }
        if let Some(&(ty, is_const)) = self.state.get(target) {
            if is_const {
                self.fail("const-write", path, target);
            }
            if self.in_modifier {
                return Some(ExprTy::from_ty(ty));
            }
            if !self.mutability.can_write_state() {
                self.fail(
                    if self.mutability == Mutability::Pure {
                        "pure-restriction"
                    } else {
                        "view-restriction"
                    },
                    path,
                    format!("write to {target}"),
                );
            }
            return Some(ExprTy::from_ty(ty));
        }
        self.fail("var-unknown", path, target);
        None
    }

    fn check_condition(&mut self, cond: &'a Expr, path: &str) {
        if contains_arith(cond) {
            self.fail("cond-no-arith", path, "arithmetic in condition");
        }
        if contains_incdec(cond) || contains_call(cond) {
            self.fail("cond-side-effect", path, "side effect in condition");
        }
        if let Some(t) = self.check_expr(cond, path) {
            if t != ExprTy::Bool {
                self.fail("cond-type", path, "non-boolean condition");
            }
        }
    }

    fn check_counter_immutable(&mut self, counter: &str, body: &[Stmt], path: &str) {
        let mut mutated = false;
        walk_stmts(body, &mut |s| match s {
            Stmt::Assign { target, .. } if target == counter => mutated = true,
            _ => {
                walk_exprs_of(s, &mut |e| {
                    if let Expr::IncDec { var, .. } = e {
                        if var == counter {
                            mutated = true;
                        }
                    }
                });
                if let Stmt::YulBlock(yul) = s {
                    walk_yul(yul, &mut |ys| {
                        if let YulStmt::Assign { name, .. } = ys {
                            if name == counter {
                                mutated = true;
                            }
                        }
                    });
                }
            }
        });
        if mutated {
            self.fail("loop-counter-mutation", path, counter);
        }
    }

    /// Per-statement isolation: a variable appearing in an IncDec appears
    /// nowhere else in the same statement.
    fn check_statement_usage(&mut self, s: &Stmt, path: &str) {
        let mut plain: BTreeMap<String, u64> = BTreeMap::new();
        let mut incdec: BTreeMap<String, u64> = BTreeMap::new();
        if let Stmt::Assign { target, .. } = s {
            *plain.entry(target.clone()).or_default() += 1;
        }
        walk_exprs_of(s, &mut |e| match e {
            Expr::VarRef(name) => *plain.entry(name.clone()).or_default() += 1,
            Expr::IncDec { var, .. } => *incdec.entry(var.clone()).or_default() += 1,
            _ => {}
        });
        for (var, n) in &incdec {
            let total = n + plain.get(var).copied().unwrap_or(0);
            if *n > 1 || total > 1 {
                self.fail("incdec-isolation", path, var);
            }
        }
    }

    fn check_expr(&mut self, e: &'a Expr, path: &str) -> Option<ExprTy> {
        match e {
            Expr::IntLit(ty, lit) => {
                if !lit.fits(*ty) {
                    self.fail("literal-range", path, lit.to_decimal());
                }
                Some(ExprTy::from_ty(*ty))
            }
            Expr::VarRef(name) => self.resolve_ref(name, path),
            Expr::ArrayLen(arr) => {
                self.check_array_known(arr, path);
                self.check_array_readable(path);
                Some(ExprTy::U)
            }
            Expr::Binary { op, lhs, rhs } => {
                let lt = self.check_expr(lhs, path)?;
                if op.is_div_like() {
                    let guarded = match rhs.as_ref() {
                        Expr::DivGuard(_) => true,
                        Expr::IntLit(_, lit) => !lit.is_zero(),
                        _ => false,
                    };
                    if !guarded {
                        self.fail("div-guard", path, "unguarded divisor");
                    }
                }
                let rt = self.check_expr(rhs, path)?;
                if op.is_arith() || op.is_relational() {
                    if !(lt.is_numeric() && lt == rt) {
                        self.fail("type-consistency", path, op.symbol());
                        return None;
                    }
                    Some(if op.is_arith() { lt } else { ExprTy::Bool })
                } else {
                    if lt != ExprTy::Bool || rt != ExprTy::Bool {
                        self.fail("type-consistency", path, op.symbol());
                    }
                    Some(ExprTy::Bool)
                }
            }
            Expr::Not(inner) => {
                if let Some(t) = self.check_expr(inner, path) {
                    if t != ExprTy::Bool {
                        self.fail("type-consistency", path, "!");
                    }
                }
                Some(ExprTy::Bool)
            }
            Expr::Cast { target, inner } => {
                if let Some(t) = self.check_expr(inner, path) {
                    if !t.is_numeric() {
                        self.fail("type-consistency", path, "cast of boolean");
                    }
                }
                Some(ExprTy::from_ty(*target))
            }
            Expr::DivGuard(inner) => {
                if contains_incdec(inner) {
                    self.fail("divguard-side-effect", path, "IncDec inside DivGuard");
                }
                self.check_expr(inner, path)
            }
            Expr::IndexGuard {
                array, fallback, ..
            } => {
                self.check_array_known(array, path);
                self.check_array_readable(path);
                if !fallback.fits(Ty::Uint256) {
                    self.fail("literal-range", path, fallback.to_decimal());
                }
                Some(ExprTy::U)
            }
            Expr::IncDec { var, .. } => {
                if self.counters.iter().any(|c| c == var) {
                    self.fail("loop-counter-mutation", path, var);
                    return Some(ExprTy::U);
                }
                if !self.in_unchecked {
                    self.fail("overflow-unchecked", path, format!("{var}++"));
                }
                if let Some(ty) = self.resolve_local(var) {
                    return Some(ExprTy::from_ty(ty));
                }
                if let Some(&(ty, is_const)) = self.state.get(var.as_str()) {
                    if is_const {
                        self.fail("const-write", path, var);
                    } else if !self.in_modifier && !self.mutability.can_write_state() {
                        self.fail("view-restriction", path, format!("{var}++"));
                    }
                    if self.in_modifier {
                        return Some(ExprTy::from_ty(ty));
                    }
                    return Some(ExprTy::from_ty(ty));
                }
                self.fail("var-unknown", path, var);
                None
            }
            Expr::Call { callee, args } => self.check_call(callee, args, path),
            Expr::Index { array, .. } => {
                self.check_array_known(array, path);
                self.fail("unguarded-index", path, array);
                Some(ExprTy::U)
            }
            Expr::SelectorAccess { function } => {
                if self.in_modifier {
                    self.fail("modifier-scope", path, "selector access");
                } else if self.mutability == Mutability::Pure {
                    self.fail("pure-restriction", path, "selector access");
                }
                match self.fns.get(function.as_str()) {
                    Some(info) if info.visibility.in_abi() => {}
                    Some(_) => self.fail("selector-target", path, function),
                    None => self.fail("fn-unknown", path, function),
                }
                Some(ExprTy::U)
            }
        }
    }

    fn check_call(&mut self, callee: &'a str, args: &'a [Expr], path: &str) -> Option<ExprTy> {
        if self.in_modifier {
            self.fail("modifier-scope", path, format!("call to {callee}"));
        }
        let info = match self.fns.get(callee) {
            Some(i) => *i,
            None => {
                self.fail("fn-unknown", path, callee);
                return None;
            }
        };
        if info.visibility == Visibility::External {
            self.fail("call-visibility", path, callee);
        }
        match self.mutability {
            Mutability::Pure if info.mutability != Mutability::Pure => {
                self.fail("call-mutability", path, callee);
            }
            Mutability::View
                if !matches!(info.mutability, Mutability::Pure | Mutability::View) =>
            {
                self.fail("call-mutability", path, callee);
            }
            _ => {}
        }
        if args.len() != info.params.len() {
            self.fail("call-args", path, callee);
        }
        for (arg, (_, pty)) in args.iter().zip(info.params) {
            if contains_incdec(arg) {
                self.fail("call-arg-side-effect", path, callee);
            }
            let mut nested_impure = false;
            walk_expr(arg, &mut |e| {
                if let Expr::Call { callee: inner, .. } = e {
                    if let Some(fi) = self.fns.get(inner.as_str()) {
                        if fi.mutability != Mutability::Pure {
                            nested_impure = true;
                        }
                    }
                }
            });
            if nested_impure {
                self.fail("call-arg-side-effect", path, callee);
            }
            if let Some(t) = self.check_expr(arg, path) {
                if t != ExprTy::from_ty(*pty) {
                    self.fail("type-consistency", path, format!("arg of {callee}"));
                }
            }
        }
        match info.ret {
            Some(ty) => Some(ExprTy::from_ty(ty)),
            None => {
                self.fail("call-no-return", path, callee);
                None
            }
        }
    }

    fn check_yul_block(&mut self, yul: &'a [YulStmt], path: &str) {
        let mut names: Vec<String> = Vec::new();
        self.check_yul_stmts(yul, &mut names, path, false);
    }

    fn check_yul_stmts(
        &mut self,
        stmts: &'a [YulStmt],
        names: &mut Vec<String>,
        path: &str,
        in_fndef: bool,
    ) {
        // Function definitions are visible in the whole block.
        for s in stmts {
            if let YulStmt::FnDef { name, .. } = s {
                names.push(name.clone());
            }
        }
        let depth = names.len();
        for (i, s) in stmts.iter().enumerate() {
            let p = format!("{path}.yul[{i}]");
            match s {
                YulStmt::Let { name, value } => {
                    self.check_yul_expr(value, names, &p);
                    names.push(name.clone());
                }
                YulStmt::Assign { name, value } => {
                    self.check_yul_name(name, names, &p);
                    self.check_yul_expr(value, names, &p);
                }
                YulStmt::Mstore { addr, value } => {
                    if *addr != 0 && *addr != 32 {
                        self.fail("yul-memory-range", &p, addr);
                    }
                    self.check_yul_expr(value, names, &p);
                }
                YulStmt::Sstore { slot, value } => {
                    if !self.mutability.can_write_state() {
                        self.fail("view-restriction", &p, "sstore");
                    }
                    self.check_slot_write(slot, &p);
                    self.check_yul_expr(value, names, &p);
                }
                YulStmt::If { cond, body } => {
                    self.check_yul_expr(cond, names, &p);
                    let before = names.len();
                    self.check_yul_stmts(body, names, &p, in_fndef);
                    names.truncate(before);
                }
                YulStmt::For {
                    counter,
                    bound,
                    body,
                } => {
                    if *bound < 1 {
                        self.fail("loop-bound", &p, bound);
                    }
                    let before = names.len();
                    names.push(counter.clone());
                    self.check_yul_stmts(body, names, &p, in_fndef);
                    names.truncate(before);
                }
                YulStmt::FnDef {
                    name,
                    params,
                    ret,
                    body,
                } => {
                    self.check_verbatim(name, &p);
                    // Yul functions see only their params/ret, not outer locals.
                    let mut inner: Vec<String> = params.clone();
                    inner.extend(ret.clone());
                    self.check_yul_stmts(body, &mut inner, &p, true);
                }
                YulStmt::Call { name, args } => {
                    self.check_verbatim(name, &p);
                    if !names.iter().any(|n| n == name) {
                        self.fail("yul-fn-unknown", &p, name);
                    }
                    for a in args {
                        self.check_yul_expr(a, names, &p);
                    }
                }
                YulStmt::HaltReturn | YulStmt::HaltStop => {
                    if !in_fndef {
                        self.fail("yul-halt-placement", &p, "halt outside wrapper fn");
                    }
                }
            }
        }
        names.truncate(depth.min(names.len()));
    }

    fn check_yul_expr(&mut self, e: &'a YulExpr, names: &[String], path: &str) {
        match e {
            YulExpr::Lit(_) => {}
            YulExpr::Ref(name) => self.check_yul_name(name, names, path),
            YulExpr::Sload(slot) => {
                if let SlotRef::StateVar(name) = slot {
                    self.check_slot_name(name, path);
                }
            }
            YulExpr::Mload(addr) => {
                if *addr != 0 && *addr != 32 {
                    self.fail("yul-memory-range", path, addr);
                }
            }
            YulExpr::Keccak { addr, len } => {
                if *addr != 0 || *len > 64 {
                    self.fail("yul-memory-range", path, format!("keccak({addr}, {len})"));
                }
            }
            YulExpr::Op { op, args } => {
                if args.len() != op.arity() {
                    self.fail("yul-arity", path, op.name());
                }
                for a in args {
                    self.check_yul_expr(a, names, path);
                }
            }
            YulExpr::CallExpr { name, args } => {
                self.check_verbatim(name, path);
                if !names.iter().any(|n| n == name) {
                    self.fail("yul-fn-unknown", path, name);
                }
                for a in args {
                    self.check_yul_expr(a, names, path);
                }
            }
        }
    }

    /// A name in Yul may be a Yul-local or a Solidity scalar local; arrays
    /// and state variables are never referenced by name inside assembly.
    fn check_yul_name(&mut self, name: &'a str, names: &[String], path: &str) {
        if self.arrays.contains(name) {
            self.fail("yul-array-ref", path, name);
            return;
        }
        if names.iter().any(|n| n == name) {
            return;
        }
        if self.resolve_local(name).is_some() || self.counters.iter().any(|c| c == name) {
            return;
        }
        if self.state.contains_key(name) {
            self.fail("yul-state-name-ref", path, name);
            return;
        }
        self.fail("yul-ref-unknown", path, name);
    }

    fn check_slot_write(&mut self, slot: &'a SlotRef, path: &str) {
        match slot {
            SlotRef::Literal(n) => {
                if self.array_slots.contains(n) {
                    self.fail("yul-array-length-write", path, format!("slot {n}"));
                }
            }
            SlotRef::StateVar(name) => self.check_slot_name(name, path),
        }
    }

    fn check_slot_name(&mut self, name: &'a str, path: &str) {
        if self.arrays.contains(name) {
            self.fail("yul-array-ref", path, name);
            return;
        }
        match self.state.get(name) {
            Some((_, true)) => self.fail("yul-slot-of-constant", path, name),
            Some((_, false)) => {}
            None => self.fail("yul-ref-unknown", path, name),
        }
    }

    fn check_verbatim(&mut self, name: &str, path: &str) {
        if name.contains("verbatim") {
            self.fail("no-verbatim", path, name);
        }
    }

    fn check_array_known(&mut self, array: &str, path: &str) {
        if !self.arrays.contains(array) {
            self.fail("array-unknown", path, array);
        }
    }

    fn check_array_readable(&mut self, path: &str) {
        if self.mutability == Mutability::Pure {
            self.fail("pure-restriction", path, "array read");
        }
    }

    fn resolve_local(&self, name: &str) -> Option<Ty> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, ty)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some(*ty);
            }
        }
        None
    }

    fn resolve_ref(&mut self, name: &'a str, path: &str) -> Option<ExprTy> {
        if self.counters.iter().any(|c| c == name) {
            return Some(ExprTy::U);
        }
        if let Some(ty) = self.resolve_local(name) {
            if self.in_modifier {
                self.fail("modifier-scope", path, name);
            }
            return Some(ExprTy::from_ty(ty));
        }
        if let Some(&(ty, is_const)) = self.state.get(name) {
            if !is_const && !self.in_modifier && !self.mutability.can_read_state() {
                self.fail("pure-restriction", path, name);
            }
            return Some(ExprTy::from_ty(ty));
        }
        self.fail("var-unknown", path, name);
        None
    }

    /// Rejects call cycles; recursion would make gas unbounded.
    fn check_call_graph(&mut self) {
        let n = self.program.functions.len();
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, f) in self.program.functions.iter().enumerate() {
            let mut callees = BTreeSet::new();
            for block in &f.body {
                walk_stmts(&block.stmts, &mut |s| {
                    walk_exprs_of(s, &mut |e| {
                        if let Expr::Call { callee, .. } = e {
                            if let Some(info) = self.fns.get(callee.as_str()) {
                                callees.insert(info.index);
                            }
                        }
                    });
                });
            }
            edges[i] = callees.into_iter().collect();
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; n];
        for start in 0..n {
            if mark[start] == 0 && has_cycle(start, &edges, &mut mark) {
                let name = self.program.functions[start].name.clone();
                self.fail("call-recursion", &format!("functions[{start}]"), name);
            }
        }
    }
}

fn has_cycle(v: usize, edges: &[Vec<usize>], mark: &mut [u8]) -> bool {
    mark[v] = 1;
    for &w in &edges[v] {
        if mark[w] == 1 || (mark[w] == 0 && has_cycle(w, edges, mark)) {
            return true;
        }
    }
    mark[v] = 2;
    false
}

fn count_placeholders(stmts: &[Stmt]) -> u64 {
    let mut n = 0;
    walk_stmts(stmts, &mut |s| {
        if matches!(s, Stmt::Placeholder) {
            n += 1;
        }
    });
    n
}

fn has_unconditional_assign(body: &[Block], name: &str) -> bool {
    fn scan(stmts: &[Stmt], name: &str) -> bool {
        stmts.iter().any(|s| match s {
            Stmt::Assign { target, op, .. } => target == name && *op == AssignOp::Assign,
            Stmt::Unchecked(inner) => scan(inner, name),
            _ => false,
        })
    }
    body.iter().any(|b| scan(&b.stmts, name))
}

/// Depth-first walk over every statement including nested blocks.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match s {
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                walk_stmts(then_block, f);
                if let Some(e) = else_block {
                    walk_stmts(e, f);
                }
            }
            Stmt::ForLoopI { body, .. } | Stmt::ForLoopII { body, .. } => walk_stmts(body, f),
            Stmt::Unchecked(inner) | Stmt::BareBlock(inner) => walk_stmts(inner, f),
            _ => {}
        }
    }
}

/// Visits the expressions directly owned by one statement (not those of
/// nested statements).
pub fn walk_exprs_of<'a>(s: &'a Stmt, f: &mut impl FnMut(&'a Expr)) {
    match s {
        Stmt::LocalDecl { init, .. } => walk_expr(init, f),
        Stmt::Assign { value, .. } => walk_expr(value, f),
        Stmt::If { cond, .. } => walk_expr(cond, f),
        Stmt::ArrayOp {
            op: ArrayOpKind::Push(e),
            ..
        } => walk_expr(e, f),
        Stmt::EmitLog { args, .. } => {
            for a in args {
                walk_expr(a, f);
            }
        }
        _ => {}
    }
}

pub fn walk_expr<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    match e {
        Expr::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        Expr::Not(inner) | Expr::Cast { inner, .. } | Expr::DivGuard(inner) => walk_expr(inner, f),
        Expr::Call { args, .. } => {
            for a in args {
                walk_expr(a, f);
            }
        }
        Expr::Index { index, .. } => walk_expr(index, f),
        _ => {}
    }
}

pub fn walk_yul<'a>(stmts: &'a [YulStmt], f: &mut impl FnMut(&'a YulStmt)) {
    for s in stmts {
        f(s);
        match s {
            YulStmt::If { body, .. }
            | YulStmt::For { body, .. }
            | YulStmt::FnDef { body, .. } => walk_yul(body, f),
            _ => {}
        }
    }
}

fn contains_arith(e: &Expr) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| match x {
        Expr::Binary { op, .. } if op.is_arith() => found = true,
        Expr::IncDec { .. } => found = true,
        _ => {}
    });
    found
}

fn contains_incdec(e: &Expr) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| {
        if matches!(x, Expr::IncDec { .. }) {
            found = true;
        }
    });
    found
}

fn contains_call(e: &Expr) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| {
        if matches!(x, Expr::Call { .. }) {
            found = true;
        }
    });
    found
}

fn reads_array(e: &Expr, array: &str) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| match x {
        Expr::ArrayLen(a) | Expr::Index { array: a, .. } => {
            if a == array {
                found = true;
            }
        }
        Expr::IndexGuard { array: a, .. } => {
            if a == array {
                found = true;
            }
        }
        _ => {}
    });
    found
}
