//! Deterministic pretty-printer from the program AST to Solidity source.
//! Equal ASTs produce byte-identical text.

use crate::ast::*;
use std::fmt::Write;

/// Serializes a program. The caller is expected to have validated the tree;
/// emission itself never fails.
pub fn emit_program(program: &Program) -> String {
    let mut e = Emitter::new();
    e.line(&format!("// SPDX-License-Identifier: {}", program.spdx_id));
    e.line(&format!("pragma solidity ^{};", program.pragma_floor));
    e.blank();
    e.line(&format!("contract {} {{", program.contract_name));
    e.indent += 1;

    for ev in &program.events {
        let params = ev
            .params
            .iter()
            .map(|(n, ty)| format!("{} {}", ty.keyword(), n))
            .collect::<Vec<_>>()
            .join(", ");
        e.line(&format!("event {}({});", ev.name, params));
    }
    if !program.state_vars.is_empty() {
        e.blank();
    }
    for sv in &program.state_vars {
        let konst = if sv.is_constant { "constant " } else { "" };
        e.line(&format!(
            "{} {}{} = {};",
            sv.ty.keyword(),
            konst,
            sv.name,
            sv.init.to_decimal()
        ));
    }
    if !program.arrays.is_empty() {
        e.blank();
    }
    for a in &program.arrays {
        if a.init_elems.is_empty() {
            e.line(&format!("uint256[] {};", a.name));
        } else {
            // First element carries an explicit cast so the literal list is
            // uint256[] rather than the narrowest fitting type.
            let elems = a
                .init_elems
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    if i == 0 {
                        format!("uint256({})", v.to_decimal())
                    } else {
                        v.to_decimal()
                    }
                })
                .collect::<Vec<_>>()
                .join(", ");
            e.line(&format!("uint256[] {} = [{}];", a.name, elems));
        }
    }
    for m in &program.modifiers {
        e.blank();
        e.line(&format!("modifier {}() {{", m.name));
        e.indent += 1;
        e.stmts(&m.body);
        e.indent -= 1;
        e.line("}");
    }
    for f in &program.functions {
        e.blank();
        e.function(f);
    }

    e.indent -= 1;
    e.line("}");
    e.out
}

/// Number of newline-terminated lines.
pub fn line_count(text: &str) -> u64 {
    text.bytes().filter(|&b| b == b'\n').count() as u64
}

struct Emitter {
    out: String,
    indent: usize,
}

impl Emitter {
    fn new() -> Emitter {
        Emitter {
            out: String::new(),
            indent: 0,
        }
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    fn function(&mut self, f: &FunctionDecl) {
        let params = f
            .params
            .iter()
            .map(|(n, ty)| format!("{} {}", ty.keyword(), n))
            .collect::<Vec<_>>()
            .join(", ");
        let mut head = format!("function {}({}) {}", f.name, params, f.visibility.keyword());
        if let Some(kw) = f.mutability.keyword() {
            write!(head, " {kw}").unwrap();
        }
        for m in &f.applied_modifiers {
            write!(head, " {m}").unwrap();
        }
        if let Some((name, ty)) = &f.returns {
            write!(head, " returns ({} {})", ty.keyword(), name).unwrap();
        }
        head.push_str(" {");
        self.line(&head);
        self.indent += 1;
        for block in &f.body {
            self.stmts(&block.stmts);
        }
        self.indent -= 1;
        self.line("}");
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::LocalDecl { name, ty, init } => {
                self.line(&format!("{} {} = {};", ty.keyword(), name, emit_expr(init)));
            }
            Stmt::Assign { target, op, value } => {
                self.line(&format!("{} {} {};", target, op.symbol(), emit_expr(value)));
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                self.line(&format!("if ({}) {{", emit_expr(cond)));
                self.indent += 1;
                self.stmts(then_block);
                self.indent -= 1;
                match else_block {
                    Some(e) => {
                        self.line("} else {");
                        self.indent += 1;
                        self.stmts(e);
                        self.indent -= 1;
                        self.line("}");
                    }
                    None => self.line("}"),
                }
            }
            Stmt::ForLoopI {
                counter,
                bound,
                body,
            } => {
                self.line(&format!(
                    "for (uint256 {counter} = 0; {counter} < {bound}; {counter}++) {{"
                ));
                self.indent += 1;
                self.stmts(body);
                self.indent -= 1;
                self.line("}");
            }
            Stmt::ForLoopII {
                counter,
                bound,
                body,
            } => {
                self.line("{");
                self.indent += 1;
                self.line(&format!("uint256 {counter} = 0;"));
                self.line(&format!("for (; {counter} < {bound}; {counter}++) {{"));
                self.indent += 1;
                self.stmts(body);
                self.indent -= 1;
                self.line("}");
                self.indent -= 1;
                self.line("}");
            }
            Stmt::YulBlock(yul) => {
                if yul.is_empty() {
                    self.line("assembly {}");
                } else {
                    self.line("assembly {");
                    self.indent += 1;
                    self.yul_stmts(yul);
                    self.indent -= 1;
                    self.line("}");
                }
            }
            Stmt::ArrayOp { array, op } => match op {
                ArrayOpKind::Push(e) => {
                    self.line(&format!("{}.push({});", array, emit_expr(e)));
                }
                ArrayOpKind::GuardedPop => {
                    self.line(&format!("if ({array}.length > 0) {array}.pop();"));
                }
                ArrayOpKind::GuardedIndexUpdate { index } => {
                    self.line(&format!(
                        "if ({array}.length > {index}) {array}[{index}]++;"
                    ));
                }
            },
            Stmt::Unchecked(inner) => {
                self.line("unchecked {");
                self.indent += 1;
                self.stmts(inner);
                self.indent -= 1;
                self.line("}");
            }
            Stmt::EmitLog { event, args } => {
                let args = args.iter().map(emit_expr).collect::<Vec<_>>().join(", ");
                self.line(&format!("emit {event}({args});"));
            }
            Stmt::ArrayLogLoop {
                array,
                event,
                id,
                cap,
                counter,
            } => {
                self.line(&format!(
                    "for (uint256 {counter} = 0; {counter} < {array}.length && {counter} < {cap}; {counter}++) {{"
                ));
                self.indent += 1;
                self.line(&format!("emit {event}({id}, {array}[{counter}]);"));
                self.indent -= 1;
                self.line("}");
            }
            Stmt::Placeholder => self.line("_;"),
            Stmt::BareBlock(inner) => {
                self.line("{");
                self.indent += 1;
                self.stmts(inner);
                self.indent -= 1;
                self.line("}");
            }
        }
    }

    fn yul_stmts(&mut self, stmts: &[YulStmt]) {
        for s in stmts {
            self.yul_stmt(s);
        }
    }

    fn yul_stmt(&mut self, s: &YulStmt) {
        match s {
            YulStmt::Let { name, value } => {
                self.line(&format!("let {} := {}", name, emit_yul_expr(value)));
            }
            YulStmt::Assign { name, value } => {
                self.line(&format!("{} := {}", name, emit_yul_expr(value)));
            }
            YulStmt::Mstore { addr, value } => {
                self.line(&format!("mstore({}, {})", addr, emit_yul_expr(value)));
            }
            YulStmt::Sstore { slot, value } => {
                self.line(&format!(
                    "sstore({}, {})",
                    emit_slot(slot),
                    emit_yul_expr(value)
                ));
            }
            YulStmt::If { cond, body } => {
                self.line(&format!("if {} {{", emit_yul_expr(cond)));
                self.indent += 1;
                self.yul_stmts(body);
                self.indent -= 1;
                self.line("}");
            }
            YulStmt::For {
                counter,
                bound,
                body,
            } => {
                self.line(&format!(
                    "for {{ let {counter} := 0 }} lt({counter}, {bound}) {{ {counter} := add({counter}, 1) }} {{"
                ));
                self.indent += 1;
                self.yul_stmts(body);
                self.indent -= 1;
                self.line("}");
            }
            YulStmt::FnDef {
                name,
                params,
                ret,
                body,
            } => {
                let params = params.join(", ");
                let rets = match ret {
                    Some(r) => format!(" -> {r}"),
                    None => String::new(),
                };
                self.line(&format!("function {name}({params}){rets} {{"));
                self.indent += 1;
                self.yul_stmts(body);
                self.indent -= 1;
                self.line("}");
            }
            YulStmt::Call { name, args } => {
                let args = args
                    .iter()
                    .map(emit_yul_expr)
                    .collect::<Vec<_>>()
                    .join(", ");
                self.line(&format!("{name}({args})"));
            }
            YulStmt::HaltReturn => self.line("return(0, 0)"),
            YulStmt::HaltStop => self.line("stop()"),
        }
    }
}

fn emit_slot(slot: &SlotRef) -> String {
    match slot {
        SlotRef::Literal(n) => n.to_string(),
        SlotRef::StateVar(name) => format!("{name}.slot"),
    }
}

fn emit_yul_expr(e: &YulExpr) -> String {
    match e {
        YulExpr::Lit(v) => v.to_string(),
        YulExpr::Ref(name) => name.clone(),
        YulExpr::Sload(slot) => format!("sload({})", emit_slot(slot)),
        YulExpr::Mload(addr) => format!("mload({addr})"),
        YulExpr::Keccak { addr, len } => format!("keccak256({addr}, {len})"),
        YulExpr::Op { op, args } => {
            let args = args
                .iter()
                .map(emit_yul_expr)
                .collect::<Vec<_>>()
                .join(", ");
            format!("{}({})", op.name(), args)
        }
        YulExpr::CallExpr { name, args } => {
            let args = args
                .iter()
                .map(emit_yul_expr)
                .collect::<Vec<_>>()
                .join(", ");
            format!("{name}({args})")
        }
    }
}

// Solidity precedence levels for the operators in the subset; higher binds
// tighter. Leaves are above every binary level.
fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Mul | BinOp::Div | BinOp::Mod => 7,
        BinOp::Add | BinOp::Sub => 6,
        BinOp::Gt | BinOp::Lt => 5,
        BinOp::Eq | BinOp::Ne => 4,
        BinOp::And => 3,
        BinOp::Or => 2,
    }
}

pub fn emit_expr(e: &Expr) -> String {
    emit_expr_prec(e, 0)
}

fn emit_expr_prec(e: &Expr, parent_prec: u8) -> String {
    match e {
        Expr::IntLit(_, lit) => {
            let text = lit.to_decimal();
            if lit.negative && parent_prec > 0 {
                format!("({text})")
            } else {
                text
            }
        }
        Expr::VarRef(name) => name.clone(),
        Expr::ArrayLen(arr) => format!("{arr}.length"),
        Expr::Binary { op, lhs, rhs } => {
            let prec = precedence(*op);
            let l = emit_expr_prec(lhs, prec);
            // Right operand needs parens at equal precedence: the subset's
            // binary operators are all left-associative.
            let r = emit_expr_prec(rhs, prec + 1);
            let text = format!("{} {} {}", l, op.symbol(), r);
            if prec < parent_prec {
                format!("({text})")
            } else {
                text
            }
        }
        Expr::Not(inner) => format!("!{}", emit_expr_prec(inner, u8::MAX)),
        Expr::Cast { target, inner } => {
            format!("{}({})", target.keyword(), emit_expr(inner))
        }
        Expr::DivGuard(inner) => {
            let d = emit_expr_prec(inner, u8::MAX);
            format!("({d} == 0 ? 1 : {d})")
        }
        Expr::IndexGuard {
            array,
            index,
            fallback,
        } => {
            format!(
                "({array}.length > {index} ? {array}[{index}] : {})",
                fallback.to_decimal()
            )
        }
        Expr::IncDec { var, inc } => {
            if *inc {
                format!("{var}++")
            } else {
                format!("{var}--")
            }
        }
        Expr::Call { callee, args } => {
            let args = args.iter().map(emit_expr).collect::<Vec<_>>().join(", ");
            format!("{callee}({args})")
        }
        Expr::Index { array, index } => format!("{}[{}]", array, emit_expr(index)),
        Expr::SelectorAccess { function } => {
            format!("uint256(uint32(this.{function}.selector))")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn div_guard_shape_is_exact() {
        let e = Expr::DivGuard(Box::new(Expr::var("b")));
        assert_eq!(emit_expr(&e), "(b == 0 ? 1 : b)");
    }

    #[test]
    fn complex_divisor_is_parenthesized() {
        let e = Expr::DivGuard(Box::new(Expr::binary(
            BinOp::Add,
            Expr::var("a"),
            Expr::var("b"),
        )));
        assert_eq!(emit_expr(&e), "((a + b) == 0 ? 1 : (a + b))");
    }

    #[test]
    fn precedence_minimal_parens() {
        // a + b * c needs no parens
        let e = Expr::binary(
            BinOp::Add,
            Expr::var("a"),
            Expr::binary(BinOp::Mul, Expr::var("b"), Expr::var("c")),
        );
        assert_eq!(emit_expr(&e), "a + b * c");
        // (a + b) * c keeps them
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::var("a"), Expr::var("b")),
            Expr::var("c"),
        );
        assert_eq!(emit_expr(&e), "(a + b) * c");
        // left-assoc: a - (b - c) keeps the right parens
        let e = Expr::binary(
            BinOp::Sub,
            Expr::var("a"),
            Expr::binary(BinOp::Sub, Expr::var("b"), Expr::var("c")),
        );
        assert_eq!(emit_expr(&e), "a - (b - c)");
        // and (a - b) - c drops the left ones
        let e = Expr::binary(
            BinOp::Sub,
            Expr::binary(BinOp::Sub, Expr::var("a"), Expr::var("b")),
            Expr::var("c"),
        );
        assert_eq!(emit_expr(&e), "a - b - c");
    }

    #[test]
    fn negative_literal_parenthesized_in_context() {
        let e = Expr::binary(
            BinOp::Mul,
            Expr::var("a"),
            Expr::IntLit(Ty::Int256, Literal::signed(-7)),
        );
        assert_eq!(emit_expr(&e), "a * (-7)");
    }

    #[test]
    fn line_count_counts_newlines() {
        assert_eq!(line_count(""), 0);
        assert_eq!(line_count("a\nb\n"), 2);
        assert_eq!(line_count("a\nb"), 1);
    }

    #[test]
    fn empty_skeleton_layout() {
        let p = Program {
            spdx_id: "MIT".into(),
            pragma_floor: "0.8.0".into(),
            contract_name: "C".into(),
            events: vec![EventDecl {
                name: "LogU".into(),
                params: vec![("id".into(), Ty::Uint256), ("value".into(), Ty::Uint256)],
            }],
            state_vars: vec![],
            arrays: vec![],
            modifiers: vec![],
            functions: vec![],
        };
        let text = emit_program(&p);
        assert_eq!(
            text,
            "// SPDX-License-Identifier: MIT\n\
             pragma solidity ^0.8.0;\n\
             \n\
             contract C {\n\
             \x20   event LogU(uint256 id, uint256 value);\n\
             }\n"
        );
    }

    // The Fig-5-shaped fixture: a public function whose whole body is one
    // unchecked run. Frozen line count for the calibration oracle.
    #[test]
    fn unchecked_block_layout_and_line_count() {
        let f = FunctionDecl {
            name: "f".into(),
            params: vec![],
            visibility: Visibility::Public,
            mutability: Mutability::Default,
            returns: None,
            applied_modifiers: vec![],
            body: vec![Block {
                stmts: vec![
                    Stmt::LocalDecl {
                        name: "a".into(),
                        ty: Ty::Uint256,
                        init: Expr::lit(Ty::Uint256, 3),
                    },
                    Stmt::LocalDecl {
                        name: "b".into(),
                        ty: Ty::Uint256,
                        init: Expr::lit(Ty::Uint256, 5),
                    },
                    Stmt::Unchecked(vec![Stmt::Assign {
                        target: "a".into(),
                        op: AssignOp::SubAssign,
                        value: Expr::var("b"),
                    }]),
                ],
            }],
        };
        let mut e = Emitter::new();
        e.function(&f);
        assert_eq!(
            e.out,
            "function f() public {\n\
             \x20   uint256 a = 3;\n\
             \x20   uint256 b = 5;\n\
             \x20   unchecked {\n\
             \x20       a -= b;\n\
             \x20   }\n\
             }\n"
        );
        assert_eq!(line_count(&e.out), 7);
    }

    #[test]
    fn equal_asts_emit_identical_bytes() {
        let p = Program {
            spdx_id: "MIT".into(),
            pragma_floor: "0.8.0".into(),
            contract_name: "C".into(),
            events: vec![EventDecl {
                name: "LogU".into(),
                params: vec![("id".into(), Ty::Uint256), ("value".into(), Ty::Uint256)],
            }],
            state_vars: vec![StateVar {
                name: "sv0".into(),
                ty: Ty::Uint256,
                init: Literal::unsigned(7),
                is_constant: false,
            }],
            arrays: vec![DynArray {
                name: "arr0".into(),
                init_elems: vec![
                    Literal::unsigned(1),
                    Literal::unsigned(2),
                    Literal::unsigned(3),
                ],
            }],
            modifiers: vec![],
            functions: vec![],
        };
        assert_eq!(emit_program(&p), emit_program(&p.clone()));
        assert!(emit_program(&p).contains("uint256[] arr0 = [uint256(1), 2, 3];"));
    }
}
