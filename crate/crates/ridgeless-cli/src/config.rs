//! Flat `key = value` experiment configuration.
//!
//! The file format is one assignment per line, `#` comments, and blank
//! lines; keys are `seed`, `d`, `n`, `n_test`, `trials`, `kernel`, `sigma`,
//! `v_grid`, `n_sweep`, and `lambda`; list values are comma-separated. A
//! parsed file is an *overlay*: only the keys present are set, and the
//! overlay is applied on top of a base configuration (the subcommand's
//! documented defaults), with command-line flags forming a second overlay
//! that wins over the file.

use std::fmt::Write as _;
use std::path::Path;

use ridgeless::experiment::ExperimentConfig;
use ridgeless::kernel::KernelSpec;
use ridgeless::{Error, Result};

/// Every key the config file and the override flags accept.
pub const VALID_KEYS: [&str; 10] = [
    "seed", "d", "n", "n_test", "trials", "kernel", "sigma", "v_grid", "n_sweep", "lambda",
];

/// Kernel family named in a config; the bandwidth arrives separately as
/// `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Linear,
    Rbf,
}

/// A partial configuration: keys that were explicitly set, nothing else.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverlay {
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub n_test: Option<usize>,
    pub trials: Option<usize>,
    pub kernel: Option<KernelChoice>,
    pub sigma: Option<f64>,
    pub v_grid: Option<Vec<f64>>,
    pub n_sweep: Option<Vec<usize>>,
    pub lambda: Option<f64>,
}

impl ConfigOverlay {
    /// Applies this overlay on top of `base`, resolving the kernel family
    /// and bandwidth together, and validates the result.
    ///
    /// `sigma` without a `kernel` key retunes the base kernel's bandwidth
    /// when that kernel is Gaussian; naming `kernel = rbf` without `sigma`
    /// keeps the base bandwidth (or the documented default of 5 when the
    /// base was linear).
    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(sigma) = self.sigma {
            // Validate eagerly so `sigma = -1` is rejected even when the
            // resolved kernel ends up linear.
            KernelSpec::rbf(sigma)?;
        }

        let family = self.kernel.unwrap_or(match base.kernel {
            KernelSpec::Linear => KernelChoice::Linear,
            KernelSpec::Rbf { .. } => KernelChoice::Rbf,
        });
        let kernel = match family {
            KernelChoice::Linear => KernelSpec::Linear,
            KernelChoice::Rbf => {
                let base_sigma = match base.kernel {
                    KernelSpec::Rbf { sigma } => sigma,
                    KernelSpec::Linear => 5.0,
                };
                KernelSpec::rbf(self.sigma.unwrap_or(base_sigma))?
            }
        };

        let cfg = ExperimentConfig {
            seed: self.seed.unwrap_or(base.seed),
            d: self.d.unwrap_or(base.d),
            n: self.n.unwrap_or(base.n),
            n_test: self.n_test.unwrap_or(base.n_test),
            trials: self.trials.unwrap_or(base.trials),
            kernel,
            v_grid: self.v_grid.clone().unwrap_or_else(|| base.v_grid.clone()),
            n_sweep: self.n_sweep.clone().unwrap_or_else(|| base.n_sweep.clone()),
            lambda: self.lambda.or(base.lambda),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_error(line: usize, message: String) -> Error {
    Error::ConfigParse { line, message }
}

fn unknown_key_error(line: usize, key: &str) -> Error {
    parse_error(
        line,
        format!("unknown key `{key}`; valid keys: {}", VALID_KEYS.join(", ")),
    )
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| parse_error(line, format!("bad value for `{key}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if raw.is_empty() {
        return Err(parse_error(line, format!("`{key}` list must not be empty")));
    }
    raw.split(',')
        .map(|item| parse_value(line, key, item.trim()))
        .collect()
}

/// Parses config-file text into an overlay.
///
/// Errors carry the 1-based line number; unknown keys list the valid ones;
/// assigning the same key twice is rejected rather than silently resolved.
pub fn parse_overlay(text: &str) -> Result<ConfigOverlay> {
    let mut overlay = ConfigOverlay::default();
    let mut seen: Vec<&str> = Vec::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_error(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(parse_error(line, format!("`{key}` has no value")));
        }
        let canonical = VALID_KEYS
            .iter()
            .find(|&&k| k == key)
            .ok_or_else(|| unknown_key_error(line, key))?;
        if seen.contains(canonical) {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }
        seen.push(canonical);

        match key {
            "seed" => overlay.seed = Some(parse_value(line, key, value)?),
            "d" => overlay.d = Some(parse_value(line, key, value)?),
            "n" => overlay.n = Some(parse_value(line, key, value)?),
            "n_test" => overlay.n_test = Some(parse_value(line, key, value)?),
            "trials" => overlay.trials = Some(parse_value(line, key, value)?),
            "kernel" => {
                overlay.kernel = Some(match value {
                    "linear" => KernelChoice::Linear,
                    "rbf" => KernelChoice::Rbf,
                    other => {
                        return Err(parse_error(
                            line,
                            format!("bad value for `kernel`: expected `linear` or `rbf`, got `{other}`"),
                        ))
                    }
                })
            }
            "sigma" => overlay.sigma = Some(parse_value(line, key, value)?),
            "v_grid" => overlay.v_grid = Some(parse_list(line, key, value)?),
            "n_sweep" => overlay.n_sweep = Some(parse_list(line, key, value)?),
            "lambda" => overlay.lambda = Some(parse_value(line, key, value)?),
            _ => unreachable!("key validated against VALID_KEYS"),
        }
    }
    Ok(overlay)
}

/// Reads and parses a config file into an overlay.
pub fn read_overlay(path: &Path) -> Result<ConfigOverlay> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_overlay(&text)
}

/// Loads a config file as a complete configuration: parsed keys override
/// the norm-sweep defaults, absent keys keep them.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    read_overlay(path)?.apply(&ExperimentConfig::figure1_defaults())
}

/// The effective configuration rendered in config-file syntax, one key per
/// line — pasteable back into a file to reproduce the run.
pub fn render(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "d = {}", cfg.d);
    let _ = writeln!(out, "n = {}", cfg.n);
    let _ = writeln!(out, "n_test = {}", cfg.n_test);
    let _ = writeln!(out, "trials = {}", cfg.trials);
    match cfg.kernel {
        KernelSpec::Linear => {
            let _ = writeln!(out, "kernel = linear");
        }
        KernelSpec::Rbf { sigma } => {
            let _ = writeln!(out, "kernel = rbf");
            let _ = writeln!(out, "sigma = {sigma}");
        }
    }
    let grid: Vec<String> = cfg.v_grid.iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "v_grid = {}", grid.join(","));
    let sweep: Vec<String> = cfg.n_sweep.iter().map(|n| format!("{n}")).collect();
    let _ = writeln!(out, "n_sweep = {}", sweep.join(","));
    if let Some(lambda) = cfg.lambda {
        let _ = writeln!(out, "lambda = {lambda}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_keeps_all_defaults() {
        let overlay = parse_overlay("").unwrap();
        assert_eq!(overlay, ConfigOverlay::default());
        let base = ExperimentConfig::figure1_defaults();
        let cfg = overlay.apply(&base).unwrap();
        assert_eq!(serde_json::to_string(&cfg).unwrap(), serde_json::to_string(&base).unwrap());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let overlay = parse_overlay("# full comment\n\n  d = 7  # trailing\n").unwrap();
        assert_eq!(overlay.d, Some(7));
        assert_eq!(overlay.n, None);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = parse_overlay("dd = 3").unwrap_err();
        match err {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("unknown key `dd`"), "{message}");
                for key in VALID_KEYS {
                    assert!(message.contains(key), "missing {key} in: {message}");
                }
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_the_line_number() {
        let err = parse_overlay("d = 3\ntrials = soon").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, .. }), "{err:?}");

        let err = parse_overlay("d = 3\n\nnot-an-assignment").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = parse_overlay("d = 3\nd = 4").unwrap_err();
        match err {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("duplicate key `d`"), "{message}");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn lists_parse_with_surrounding_whitespace() {
        let overlay = parse_overlay("v_grid = 0, 1.5 ,3\nn_sweep = 2,4,8").unwrap();
        assert_eq!(overlay.v_grid, Some(vec![0.0, 1.5, 3.0]));
        assert_eq!(overlay.n_sweep, Some(vec![2, 4, 8]));
    }

    #[test]
    fn negative_sigma_is_rejected_by_name() {
        let overlay = parse_overlay("sigma = -1").unwrap();
        let err = overlay.apply(&ExperimentConfig::figure1_defaults()).unwrap_err();
        assert!(err.to_string().contains("sigma"), "{err}");
    }

    #[test]
    fn kernel_resolution_combines_family_and_bandwidth() {
        let base = ExperimentConfig::figure1_defaults(); // linear kernel
        let cfg = parse_overlay("kernel = rbf").unwrap().apply(&base).unwrap();
        assert_eq!(cfg.kernel, KernelSpec::Rbf { sigma: 5.0 });

        let cfg = parse_overlay("kernel = rbf\nsigma = 2").unwrap().apply(&base).unwrap();
        assert_eq!(cfg.kernel, KernelSpec::Rbf { sigma: 2.0 });

        let rbf_base = ExperimentConfig::descent_defaults(); // rbf(5)
        let cfg = parse_overlay("sigma = 3").unwrap().apply(&rbf_base).unwrap();
        assert_eq!(cfg.kernel, KernelSpec::Rbf { sigma: 3.0 });

        let cfg = parse_overlay("kernel = linear").unwrap().apply(&rbf_base).unwrap();
        assert_eq!(cfg.kernel, KernelSpec::Linear);
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let err = parse_overlay("v_grid = 1,2").unwrap()
            .apply(&ExperimentConfig::figure1_defaults())
            .unwrap_err();
        assert!(err.to_string().contains("v_grid"), "{err}");

        let err = parse_overlay("n_sweep = 5,5").unwrap()
            .apply(&ExperimentConfig::figure1_defaults())
            .unwrap_err();
        assert!(err.to_string().contains("n_sweep"), "{err}");
    }

    #[test]
    fn render_round_trips_through_the_parser() {
        for base in [
            ExperimentConfig::figure1_defaults(),
            ExperimentConfig::descent_defaults(),
            ExperimentConfig::bench_defaults(),
        ] {
            let text = render(&base);
            let reparsed = parse_overlay(&text)
                .unwrap()
                .apply(&ExperimentConfig::figure1_defaults())
                .unwrap();
            assert_eq!(
                serde_json::to_string(&reparsed).unwrap(),
                serde_json::to_string(&base).unwrap(),
                "render/parse mismatch for:\n{text}"
            );
        }
    }
}
