//! AST for the generated Solidity subset and its embedded Yul subset.
//!
//! The tree is the source of truth: the emitter serializes it without any
//! parsing step, and all compliance/consistency rules are checked directly
//! on the tree by `validate`.

/// The two scalar types the generator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ty {
    Uint256,
    Int256,
}

impl Ty {
    pub fn keyword(self) -> &'static str {
        match self {
            Ty::Uint256 => "uint256",
            Ty::Int256 => "int256",
        }
    }
}

/// An integer literal stored as a canonical decimal string so the full
/// uint256/int256 range is representable without a bignum dependency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub negative: bool,
    /// Decimal digits, no sign, no leading zeros ("0" for zero).
    pub magnitude: String,
}

impl Literal {
    pub fn unsigned(v: u64) -> Literal {
        Literal {
            negative: false,
            magnitude: v.to_string(),
        }
    }

    pub fn signed(v: i64) -> Literal {
        Literal {
            negative: v < 0,
            magnitude: v.unsigned_abs().to_string(),
        }
    }

    pub fn from_decimal(s: &str) -> Literal {
        let (negative, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let trimmed = digits.trim_start_matches('0');
        let magnitude = if trimmed.is_empty() { "0" } else { trimmed };
        Literal {
            negative: negative && magnitude != "0",
            magnitude: magnitude.to_string(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == "0"
    }

    /// Compares the magnitude against another canonical decimal string.
    fn magnitude_leq(&self, bound: &str) -> bool {
        let m = &self.magnitude;
        (m.len(), m.as_str()) <= (bound.len(), bound)
    }

    /// True when the value fits the range of `ty`.
    pub fn fits(&self, ty: Ty) -> bool {
        match ty {
            Ty::Uint256 => !self.negative && self.magnitude_leq(UINT256_MAX),
            Ty::Int256 => {
                if self.negative {
                    // Stay at -(2^255 - 1): the exact minimum cannot be
                    // written as a plain negated decimal literal in Solidity.
                    self.magnitude_leq(INT256_MAX_MAG)
                } else {
                    self.magnitude_leq(INT256_MAX_MAG)
                }
            }
        }
    }

    pub fn to_decimal(&self) -> String {
        if self.negative {
            format!("-{}", self.magnitude)
        } else {
            self.magnitude.clone()
        }
    }
}

pub const UINT256_MAX: &str =
    "115792089237316195423570985008687907853269984665640564039457584007913129639935";
pub const INT256_MAX_MAG: &str =
    "57896044618658097711785492504343953926634992332820282019728792003956564819967";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Gt,
    Lt,
    Eq,
    Ne,
    Or,
    And,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Gt => ">",
            BinOp::Lt => "<",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Or => "||",
            BinOp::And => "&&",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        )
    }

    pub fn is_div_like(self) -> bool {
        matches!(self, BinOp::Div | BinOp::Mod)
    }

    pub fn is_relational(self) -> bool {
        matches!(self, BinOp::Gt | BinOp::Lt | BinOp::Eq | BinOp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    IntLit(Ty, Literal),
    VarRef(String),
    /// `arr.length`
    ArrayLen(String),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Box<Expr>),
    Cast {
        target: Ty,
        inner: Box<Expr>,
    },
    /// Division-by-zero guard around a divisor `d`, emitted as
    /// `(d == 0 ? 1 : d)`. The inner expression must be side-effect-free
    /// because it is emitted twice.
    DivGuard(Box<Expr>),
    /// Bounds-safe array read, emitted as `(arr.length > K ? arr[K] : fb)`.
    IndexGuard {
        array: String,
        index: u64,
        fallback: Literal,
    },
    /// Postfix `v++` / `v--`.
    IncDec {
        var: String,
        inc: bool,
    },
    Call {
        callee: String,
        args: Vec<Expr>,
    },
    /// Unguarded array read. The generator never emits this directly; the
    /// validator flags it outside of guard contexts.
    Index {
        array: String,
        index: Box<Expr>,
    },
    /// `uint256(uint32(this.f.selector))` (cast chain added by the emitter).
    SelectorAccess {
        function: String,
    },
}

impl Expr {
    pub fn lit(ty: Ty, v: u64) -> Expr {
        Expr::IntLit(ty, Literal::unsigned(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::VarRef(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn cast(target: Ty, inner: Expr) -> Expr {
        Expr::Cast {
            target,
            inner: Box::new(inner),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    AddAssign,
    SubAssign,
    MulAssign,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::AddAssign => "+=",
            AssignOp::SubAssign => "-=",
            AssignOp::MulAssign => "*=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayOpKind {
    /// `arr.push(expr);` — grows by exactly one element.
    Push(Expr),
    /// `if (arr.length > 0) arr.pop();`
    GuardedPop,
    /// `if (arr.length > K) arr[K]++;`
    GuardedIndexUpdate { index: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    LocalDecl {
        name: String,
        ty: Ty,
        init: Expr,
    },
    Assign {
        target: String,
        op: AssignOp,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Vec<Stmt>,
        else_block: Option<Vec<Stmt>>,
    },
    /// `for (uint256 iN = 0; iN < bound; iN++) { body }`
    ForLoopI {
        counter: String,
        bound: u64,
        body: Vec<Stmt>,
    },
    /// `{ uint256 iN = 0; for (; iN < bound; iN++) { body } }` — counter
    /// declared before the loop, both wrapped in a bare block.
    ForLoopII {
        counter: String,
        bound: u64,
        body: Vec<Stmt>,
    },
    YulBlock(Vec<YulStmt>),
    ArrayOp {
        array: String,
        op: ArrayOpKind,
    },
    Unchecked(Vec<Stmt>),
    EmitLog {
        event: String,
        args: Vec<Expr>,
    },
    /// Bounded element dump:
    /// `for (uint256 c = 0; c < arr.length && c < cap; c++) { emit ev(id, arr[c]); }`
    ArrayLogLoop {
        array: String,
        event: String,
        id: u64,
        cap: u64,
        counter: String,
    },
    /// `_;` — only valid inside modifier bodies.
    Placeholder,
    BareBlock(Vec<Stmt>),
}

/// Storage slot reference inside Yul: a literal slot number or a scalar
/// state variable's `.slot`.
#[derive(Debug, Clone, PartialEq)]
pub enum SlotRef {
    Literal(u64),
    StateVar(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YulOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Lt,
    Gt,
    Eq,
    IsZero,
}

impl YulOp {
    pub fn name(self) -> &'static str {
        match self {
            YulOp::Add => "add",
            YulOp::Sub => "sub",
            YulOp::Mul => "mul",
            YulOp::Div => "div",
            YulOp::Mod => "mod",
            YulOp::And => "and",
            YulOp::Or => "or",
            YulOp::Xor => "xor",
            YulOp::Lt => "lt",
            YulOp::Gt => "gt",
            YulOp::Eq => "eq",
            YulOp::IsZero => "iszero",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            YulOp::IsZero => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum YulExpr {
    Lit(u64),
    /// A Yul-local or a Solidity scalar local variable.
    Ref(String),
    Sload(SlotRef),
    Mload(u64),
    Keccak { addr: u64, len: u64 },
    Op { op: YulOp, args: Vec<YulExpr> },
    /// Call to a user-defined Yul function in expression position.
    CallExpr { name: String, args: Vec<YulExpr> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum YulStmt {
    Let {
        name: String,
        value: YulExpr,
    },
    /// Assignment to a Yul local or a Solidity scalar local.
    Assign {
        name: String,
        value: YulExpr,
    },
    Mstore {
        addr: u64,
        value: YulExpr,
    },
    Sstore {
        slot: SlotRef,
        value: YulExpr,
    },
    If {
        cond: YulExpr,
        body: Vec<YulStmt>,
    },
    /// `for { let c := 0 } lt(c, bound) { c := add(c, 1) } { body }`
    For {
        counter: String,
        bound: u64,
        body: Vec<YulStmt>,
    },
    FnDef {
        name: String,
        params: Vec<String>,
        ret: Option<String>,
        body: Vec<YulStmt>,
    },
    /// Statement-position call to a user-defined Yul function.
    Call {
        name: String,
        args: Vec<YulExpr>,
    },
    /// `return(0, 0)` / `stop()` — only inside user-defined Yul functions
    /// (the storage-write-return strategy wrappers).
    HaltReturn,
    HaltStop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventDecl {
    pub name: String,
    pub params: Vec<(String, Ty)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVar {
    pub name: String,
    pub ty: Ty,
    pub init: Literal,
    pub is_constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynArray {
    pub name: String,
    pub init_elems: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifierDecl {
    pub name: String,
    pub body: Vec<Stmt>,
    pub placeholder_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    External,
    Internal,
}

impl Visibility {
    pub fn keyword(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::External => "external",
            Visibility::Internal => "internal",
        }
    }

    pub fn in_abi(self) -> bool {
        matches!(self, Visibility::Public | Visibility::External)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutability {
    Default,
    View,
    Pure,
    Payable,
}

impl Mutability {
    pub fn keyword(self) -> Option<&'static str> {
        match self {
            Mutability::Default => None,
            Mutability::View => Some("view"),
            Mutability::Pure => Some("pure"),
            Mutability::Payable => Some("payable"),
        }
    }

    pub fn can_write_state(self) -> bool {
        matches!(self, Mutability::Default | Mutability::Payable)
    }

    pub fn can_read_state(self) -> bool {
        !matches!(self, Mutability::Pure)
    }
}

/// The paper-style "code block": a run of nodes generated as one region.
/// Blocks are a generation bookkeeping unit; they are emitted flat, so
/// locals persist across block boundaries within one function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub visibility: Visibility,
    pub mutability: Mutability,
    pub returns: Option<(String, Ty)>,
    pub applied_modifiers: Vec<String>,
    pub body: Vec<Block>,
}

/// Full AST of one generated contract.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub spdx_id: String,
    /// Pragma floor, e.g. "0.8.0"; emitted as `pragma solidity ^0.8.0;`.
    pub pragma_floor: String,
    pub contract_name: String,
    pub events: Vec<EventDecl>,
    pub state_vars: Vec<StateVar>,
    pub arrays: Vec<DynArray>,
    pub modifiers: Vec<ModifierDecl>,
    pub functions: Vec<FunctionDecl>,
}

impl Program {
    /// Storage slot layout: non-constant scalars first (declaration order),
    /// then one slot per dynamic array.
    pub fn scalar_slots(&self) -> Vec<(String, u64)> {
        self.state_vars
            .iter()
            .filter(|sv| !sv.is_constant)
            .enumerate()
            .map(|(i, sv)| (sv.name.clone(), i as u64))
            .collect()
    }

    pub fn array_slots(&self) -> Vec<(String, u64)> {
        let base = self.state_vars.iter().filter(|sv| !sv.is_constant).count() as u64;
        self.arrays
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.clone(), base + i as u64))
            .collect()
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_fits_ranges() {
        assert!(Literal::unsigned(0).fits(Ty::Uint256));
        assert!(Literal::from_decimal(UINT256_MAX).fits(Ty::Uint256));
        let over = format!("{}6", &UINT256_MAX[..UINT256_MAX.len() - 1]);
        assert!(!Literal::from_decimal(&over).fits(Ty::Uint256));
        assert!(!Literal::signed(-1).fits(Ty::Uint256));
        assert!(Literal::from_decimal(INT256_MAX_MAG).fits(Ty::Int256));
        assert!(Literal::from_decimal(&format!("-{INT256_MAX_MAG}")).fits(Ty::Int256));
        assert!(!Literal::from_decimal(UINT256_MAX).fits(Ty::Int256));
    }

    #[test]
    fn literal_canonicalizes() {
        assert_eq!(Literal::from_decimal("-000").to_decimal(), "0");
        assert_eq!(Literal::from_decimal("007").to_decimal(), "7");
        assert_eq!(Literal::from_decimal("-042").to_decimal(), "-42");
    }

    #[test]
    fn slot_layout_skips_constants() {
        let p = Program {
            spdx_id: "MIT".into(),
            pragma_floor: "0.8.0".into(),
            contract_name: "C".into(),
            events: vec![],
            state_vars: vec![
                StateVar {
                    name: "sv0".into(),
                    ty: Ty::Uint256,
                    init: Literal::unsigned(1),
                    is_constant: false,
                },
                StateVar {
                    name: "sv1".into(),
                    ty: Ty::Uint256,
                    init: Literal::unsigned(2),
                    is_constant: true,
                },
                StateVar {
                    name: "sv2".into(),
                    ty: Ty::Int256,
                    init: Literal::signed(-3),
                    is_constant: false,
                },
            ],
            arrays: vec![DynArray {
                name: "arr0".into(),
                init_elems: vec![],
            }],
            modifiers: vec![],
            functions: vec![],
        };
        assert_eq!(
            p.scalar_slots(),
            vec![("sv0".to_string(), 0), ("sv2".to_string(), 1)]
        );
        assert_eq!(p.array_slots(), vec![("arr0".to_string(), 2)]);
    }
}
