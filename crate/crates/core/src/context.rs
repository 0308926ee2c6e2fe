//! Mutable generation state threaded through all builders: PRNG, scoped
//! symbol tables, depth counters, the placeholder counter, the per-statement
//! usage map, and the LIFO stack of (possibly distorted) strategy weights.

use crate::ast::Ty;
use crate::config::{GenConfig, StrategyWeights};
use crate::policies::UsageMap;
use crate::prng::Prng;

#[derive(Debug, Clone)]
pub struct LocalVar {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone)]
pub struct StateSym {
    pub name: String,
    pub ty: Ty,
    pub is_constant: bool,
    /// Storage slot for non-constant scalars.
    pub slot: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ArraySym {
    pub name: String,
    pub init_len: u64,
    pub slot: u64,
}

#[derive(Debug, Clone)]
pub struct FnSym {
    pub name: String,
    pub index: usize,
    pub params: Vec<Ty>,
    pub ret: Option<Ty>,
    pub visibility: crate::ast::Visibility,
    pub mutability: crate::ast::Mutability,
    /// Static work estimate of the filled body; used to bound gas at call
    /// sites inside loops. Zero until the body is filled.
    pub work: u64,
}

#[derive(Debug)]
pub struct GenContext {
    pub prng: Prng,
    pub cfg: GenConfig,
    /// Stack of local symbol tables; depth equals syntactic block depth.
    scopes: Vec<Vec<LocalVar>>,
    /// Loop counters currently in scope (readable, never mutable).
    pub counters: Vec<String>,
    pub state_syms: Vec<StateSym>,
    pub array_syms: Vec<ArraySym>,
    pub modifier_names: Vec<String>,
    pub fn_syms: Vec<FnSym>,
    pub cond_loop_depth: u64,
    pub call_nesting_depth: u64,
    pub placeholder_counter: u64,
    pub usage: UsageMap,
    weight_stack: Vec<StrategyWeights>,
    /// Live-local accounting base: params + named return of the function
    /// under construction.
    pub frame_locals: u64,
    local_name_counter: u64,
    yul_name_counter: u64,
    yul_fn_name_counter: u64,
}

impl GenContext {
    pub fn new(seed: u64, cfg: GenConfig) -> GenContext {
        let base = cfg.strategy_weights.clone();
        GenContext {
            prng: Prng::seeded(seed),
            cfg,
            scopes: Vec::new(),
            counters: Vec::new(),
            state_syms: Vec::new(),
            array_syms: Vec::new(),
            modifier_names: Vec::new(),
            fn_syms: Vec::new(),
            cond_loop_depth: 0,
            call_nesting_depth: 0,
            placeholder_counter: 0,
            usage: UsageMap::default(),
            weight_stack: vec![base],
            frame_locals: 0,
            local_name_counter: 0,
            yul_name_counter: 0,
            yul_fn_name_counter: 0,
        }
    }

    // ---- scope management ----

    pub fn enter_scope(&mut self) {
        self.scopes.push(Vec::new());
    }

    pub fn exit_scope(&mut self) {
        self.scopes.pop().expect("exit_scope on empty scope stack");
    }

    pub fn scope_depth(&self) -> usize {
        self.scopes.len()
    }

    /// Resets per-function state and installs the frame scope.
    pub fn begin_function(&mut self, frame_locals: u64) {
        self.scopes = vec![Vec::new()];
        self.counters.clear();
        self.cond_loop_depth = 0;
        self.local_name_counter = 0;
        self.yul_name_counter = 0;
        self.yul_fn_name_counter = 0;
        self.frame_locals = frame_locals;
    }

    pub fn declare_local(&mut self, name: &str, ty: Ty) {
        self.scopes
            .last_mut()
            .expect("declare_local without scope")
            .push(LocalVar {
                name: name.to_string(),
                ty,
            });
        debug_assert!(
            self.live_locals() <= self.cfg.max_live_locals,
            "live-local budget exceeded at declaration of {name}"
        );
    }

    /// Locals currently in scope (including loop counters and the frame's
    /// params/return), innermost last.
    pub fn visible_locals(&self) -> Vec<LocalVar> {
        self.scopes.iter().flatten().cloned().collect()
    }

    pub fn live_locals(&self) -> u64 {
        self.frame_locals
            + self.counters.len() as u64
            + self.scopes.iter().map(|s| s.len() as u64).sum::<u64>()
    }

    pub fn can_declare_local(&self) -> bool {
        self.live_locals() < self.cfg.max_live_locals
    }

    pub fn fresh_local_name(&mut self) -> String {
        let n = self.local_name_counter;
        self.local_name_counter += 1;
        format!("v{n}")
    }

    pub fn fresh_yul_name(&mut self) -> String {
        let n = self.yul_name_counter;
        self.yul_name_counter += 1;
        format!("y{n}")
    }

    pub fn fresh_yul_fn_name(&mut self) -> String {
        let n = self.yul_fn_name_counter;
        self.yul_fn_name_counter += 1;
        format!("yf{n}")
    }

    /// Loop counter name for a given 1-based loop depth; same-depth loops
    /// share the name.
    pub fn counter_name(depth: u64) -> String {
        format!("i{depth}")
    }

    // ---- strategy weight stack (region distortion) ----

    pub fn active_weights(&self) -> &StrategyWeights {
        self.weight_stack.last().expect("weight stack never empty")
    }

    /// On block entry: with probability `distortion.fraction`, multiply one
    /// randomly chosen strategy weight by a factor from the multiplier range
    /// and install the result for the block's duration. A distorted block
    /// commits to one strategy family: boosting the storage-write-return
    /// strategy suppresses Solidity-variable references and vice versa.
    pub fn push_region_weights(&mut self) {
        let fraction = self.cfg.distortion.fraction;
        if fraction > 0.0 && self.prng.chance(fraction) {
            let [lo, hi] = self.cfg.distortion.multiplier_range;
            let factor = lo + self.prng.next_f64() * (hi - lo);
            let which = self.prng.next_bounded(4);
            let mut w = self.active_weights().clone();
            match which {
                0 => w.keccak_pair *= factor,
                1 => {
                    w.storage_write_return *= factor;
                    w.yul_solvar_ref = 0.0;
                }
                2 => {
                    w.yul_solvar_ref *= factor;
                    w.storage_write_return = 0.0;
                }
                _ => w.selector_access *= factor,
            }
            self.weight_stack.push(w);
        } else {
            let top = self.active_weights().clone();
            self.weight_stack.push(top);
        }
    }

    /// Pushes an explicitly distorted copy (used by tests and by callers
    /// that already drew the distortion parameters).
    pub fn push_distorted(&mut self, apply: impl FnOnce(&mut StrategyWeights)) {
        let mut w = self.active_weights().clone();
        apply(&mut w);
        self.weight_stack.push(w);
    }

    pub fn pop_region_weights(&mut self) {
        assert!(
            self.weight_stack.len() > 1,
            "pop_region_weights would drop the base weights"
        );
        self.weight_stack.pop();
    }

    /// Weighted draw over `(kind, weight)` pairs. Weights may be zero; at
    /// least one must be positive.
    pub fn pick_weighted<K: Copy>(&mut self, choices: &[(K, f64)]) -> K {
        let total: f64 = choices.iter().map(|(_, w)| w.max(0.0)).sum();
        assert!(
            total > 0.0,
            "pick_weighted requires at least one positive weight"
        );
        let mut draw = self.prng.next_f64() * total;
        for (kind, w) in choices {
            let w = w.max(0.0);
            if draw < w {
                return *kind;
            }
            draw -= w;
        }
        choices.last().expect("non-empty choices").0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> GenContext {
        GenContext::new(1, GenConfig::default())
    }

    #[test]
    fn scope_exit_drops_locals() {
        let mut c = ctx();
        c.begin_function(0);
        c.enter_scope();
        c.declare_local("v0", Ty::Uint256);
        assert_eq!(c.live_locals(), 1);
        assert!(c.visible_locals().iter().any(|l| l.name == "v0"));
        c.exit_scope();
        assert_eq!(c.live_locals(), 0);
        assert!(!c.visible_locals().iter().any(|l| l.name == "v0"));
    }

    #[test]
    #[should_panic(expected = "exit_scope on empty scope stack")]
    fn exit_on_empty_scope_panics() {
        let mut c = ctx();
        c.begin_function(0);
        c.exit_scope();
        c.exit_scope();
    }

    #[test]
    fn live_local_budget_counts_frame_and_counters() {
        let mut c = ctx();
        c.begin_function(3); // 2 params + named return
        for i in 0..10 {
            c.declare_local(&format!("v{i}"), Ty::Uint256);
        }
        assert_eq!(c.live_locals(), 13);
        c.counters.push("i1".into());
        assert_eq!(c.live_locals(), 14);
        assert!(c.can_declare_local());
        c.declare_local("v10", Ty::Uint256);
        assert_eq!(c.live_locals(), 15);
        assert!(!c.can_declare_local());
    }

    #[test]
    fn weighted_pick_degenerate_cases() {
        let mut c = ctx();
        for _ in 0..32 {
            assert_eq!(c.pick_weighted(&[('a', 1.0)]), 'a');
            assert_eq!(c.pick_weighted(&[('a', 1.0), ('b', 0.0)]), 'a');
        }
    }

    #[test]
    fn weighted_pick_ratio() {
        let mut c = ctx();
        let mut b_count = 0u64;
        let n = 100_000;
        for _ in 0..n {
            if c.pick_weighted(&[('a', 1.0), ('b', 3.0)]) == 'b' {
                b_count += 1;
            }
        }
        let freq = b_count as f64 / n as f64;
        assert!((freq - 0.75).abs() < 0.02, "B frequency {freq}");
    }

    #[test]
    fn distortion_stack_unwinds_lifo() {
        let mut c = ctx();
        let base = c.active_weights().keccak_pair;
        c.push_distorted(|w| w.keccak_pair *= 4.0);
        assert_eq!(c.active_weights().keccak_pair, base * 4.0);
        c.push_distorted(|w| w.keccak_pair *= 2.0);
        assert_eq!(c.active_weights().keccak_pair, base * 8.0);
        c.pop_region_weights();
        assert_eq!(c.active_weights().keccak_pair, base * 4.0);
        c.pop_region_weights();
        assert_eq!(c.active_weights().keccak_pair, base);
    }

    #[test]
    fn zero_fraction_distortion_is_noop() {
        let mut c = ctx();
        c.cfg.distortion.fraction = 0.0;
        let base = c.active_weights().clone();
        c.push_region_weights();
        assert_eq!(c.active_weights(), &base);
        c.pop_region_weights();
        assert_eq!(c.active_weights(), &base);
    }
}
