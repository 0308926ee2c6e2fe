//! Generation configuration: probability weights and structural limits.
//!
//! Every field has a default; a config file (TOML or JSON) may override any
//! subset. Unknown keys are rejected so typos fail loudly.

use serde::{Deserialize, Serialize};
use std::path::Path;

/// Inclusive integer range used for count draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub lo: u64,
    pub hi: u64,
}

impl CountRange {
    pub const fn new(lo: u64, hi: u64) -> Self {
        CountRange { lo, hi }
    }
}

/// Relative weights for the six statement kinds on the generation menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StmtWeights {
    pub local_decl: f64,
    pub assign: f64,
    pub conditional: f64,
    pub for_loop: f64,
    pub yul_block: f64,
    pub array_op: f64,
}

impl Default for StmtWeights {
    fn default() -> Self {
        StmtWeights {
            local_decl: 3.0,
            assign: 5.0,
            conditional: 2.0,
            for_loop: 2.0,
            yul_block: 2.0,
            array_op: 2.0,
        }
    }
}

/// Relative weights for expression node kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExprWeights {
    pub literal: f64,
    pub var_ref: f64,
    pub binary: f64,
    pub call: f64,
    pub index_guard: f64,
    pub inc_dec: f64,
}

impl Default for ExprWeights {
    fn default() -> Self {
        ExprWeights {
            literal: 2.0,
            var_ref: 4.0,
            binary: 5.0,
            call: 1.0,
            index_guard: 1.0,
            inc_dec: 1.0,
        }
    }
}

/// Relative weights for the optimization-trigger strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategyWeights {
    pub keccak_pair: f64,
    pub storage_write_return: f64,
    pub yul_solvar_ref: f64,
    pub selector_access: f64,
}

impl Default for StrategyWeights {
    fn default() -> Self {
        StrategyWeights {
            keccak_pair: 1.0,
            storage_write_return: 0.1,
            yul_solvar_ref: 1.0,
            selector_access: 0.3,
        }
    }
}

/// Region-distortion parameters: with probability `fraction`, a block runs
/// under strategy weights multiplied by a factor drawn from
/// `multiplier_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistortionConfig {
    pub fraction: f64,
    pub multiplier_range: [f64; 2],
}

impl Default for DistortionConfig {
    fn default() -> Self {
        DistortionConfig {
            fraction: 0.25,
            multiplier_range: [0.5, 4.0],
        }
    }
}

/// All probability weights and structural limits steering generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub max_functions: u64,
    pub max_blocks_per_function: u64,
    pub max_nodes_per_block: u64,
    pub max_expr_depth: u64,
    pub max_call_nesting: u64,
    pub max_cond_loop_depth: u64,
    /// Maximum simultaneously live locals (params + declared locals). The
    /// EVM can only reach 16 stack slots; the default leaves headroom for
    /// compiler temporaries.
    pub max_live_locals: u64,
    pub loop_bound_range: CountRange,
    pub state_var_count_range: CountRange,
    pub array_count_range: CountRange,
    pub array_len_range: CountRange,
    pub modifier_count_range: CountRange,
    pub stmt_weights: StmtWeights,
    pub expr_weights: ExprWeights,
    pub strategy_weights: StrategyWeights,
    pub distortion: DistortionConfig,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_functions: 8,
            max_blocks_per_function: 4,
            max_nodes_per_block: 8,
            max_expr_depth: 4,
            max_call_nesting: 2,
            max_cond_loop_depth: 3,
            max_live_locals: 15,
            loop_bound_range: CountRange::new(1, 8),
            state_var_count_range: CountRange::new(4, 10),
            array_count_range: CountRange::new(1, 3),
            array_len_range: CountRange::new(1, 8),
            modifier_count_range: CountRange::new(1, 3),
            stmt_weights: StmtWeights::default(),
            expr_weights: ExprWeights::default(),
            strategy_weights: StrategyWeights::default(),
            distortion: DistortionConfig::default(),
        }
    }
}

/// Hard EVM limit: variables in the 16th or deeper stack slot are
/// unreachable, so no config may allow more than 16 live locals.
pub const LIVE_LOCALS_HARD_CAP: u64 = 16;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config value: {0}")]
    Invalid(String),
}

impl GenConfig {
    /// Loads a config from a `.toml` or `.json` file, with unset fields
    /// falling back to defaults and unknown keys rejected.
    pub fn load(path: &Path) -> Result<GenConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let cfg: GenConfig = if is_json {
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_live_locals > LIVE_LOCALS_HARD_CAP {
            return Err(ConfigError::Invalid(format!(
                "max_live_locals {} exceeds the EVM stack reachability cap {}",
                self.max_live_locals, LIVE_LOCALS_HARD_CAP
            )));
        }
        if self.loop_bound_range.lo < 1 {
            return Err(ConfigError::Invalid(
                "loop_bound_range.lo must be >= 1".into(),
            ));
        }
        for (name, r) in [
            ("loop_bound_range", self.loop_bound_range),
            ("state_var_count_range", self.state_var_count_range),
            ("array_count_range", self.array_count_range),
            ("array_len_range", self.array_len_range),
            ("modifier_count_range", self.modifier_count_range),
        ] {
            if r.lo > r.hi {
                return Err(ConfigError::Invalid(format!("{name}: lo > hi")));
            }
        }
        let w = &self.stmt_weights;
        let all = [
            w.local_decl,
            w.assign,
            w.conditional,
            w.for_loop,
            w.yul_block,
            w.array_op,
            self.expr_weights.literal,
            self.expr_weights.var_ref,
            self.expr_weights.binary,
            self.expr_weights.call,
            self.expr_weights.index_guard,
            self.expr_weights.inc_dec,
            self.strategy_weights.keccak_pair,
            self.strategy_weights.storage_write_return,
            self.strategy_weights.yul_solvar_ref,
            self.strategy_weights.selector_access,
        ];
        if all.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(ConfigError::Invalid(
                "weights must be finite and >= 0".into(),
            ));
        }
        let stmt_total = w.local_decl + w.assign + w.conditional + w.for_loop + w.yul_block + w.array_op;
        if stmt_total <= 0.0 {
            return Err(ConfigError::Invalid(
                "at least one statement weight must be > 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.distortion.fraction) {
            return Err(ConfigError::Invalid(
                "distortion.fraction must be in [0, 1]".into(),
            ));
        }
        let [lo, hi] = self.distortion.multiplier_range;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
            return Err(ConfigError::Invalid(
                "distortion.multiplier_range must satisfy 0 <= lo <= hi".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_validate() {
        GenConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let mut f = tempfile_named("cfg.toml");
        writeln!(f.1, "max_functions = 3\n[stmt_weights]\nassign = 9.0").unwrap();
        let cfg = GenConfig::load(&f.0).unwrap();
        assert_eq!(cfg.max_functions, 3);
        assert_eq!(cfg.stmt_weights.assign, 9.0);
        assert_eq!(cfg.max_expr_depth, GenConfig::default().max_expr_depth);
    }

    #[test]
    fn unknown_key_rejected_and_named() {
        let mut f = tempfile_named("cfg.toml");
        writeln!(f.1, "max_funcs = 3").unwrap();
        let err = GenConfig::load(&f.0).unwrap_err();
        assert!(err.to_string().contains("max_funcs"), "{err}");
    }

    #[test]
    fn json_config_loads() {
        let mut f = tempfile_named("cfg.json");
        writeln!(f.1, "{{\"max_live_locals\": 12}}").unwrap();
        let cfg = GenConfig::load(&f.0).unwrap();
        assert_eq!(cfg.max_live_locals, 12);
    }

    #[test]
    fn live_local_cap_enforced() {
        let mut cfg = GenConfig::default();
        cfg.max_live_locals = 17;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn all_zero_stmt_weights_rejected() {
        let mut cfg = GenConfig::default();
        cfg.stmt_weights = StmtWeights {
            local_decl: 0.0,
            assign: 0.0,
            conditional: 0.0,
            for_loop: 0.0,
            yul_block: 0.0,
            array_op: 0.0,
        };
        assert!(cfg.validate().is_err());
    }

    fn tempfile_named(name: &str) -> (std::path::PathBuf, std::fs::File) {
        let dir = std::env::temp_dir().join(format!(
            "solgen-cfg-test-{}-{}",
            std::process::id(),
            name
        ));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let f = std::fs::File::create(&path).unwrap();
        (path, f)
    }
}
