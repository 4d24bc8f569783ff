//! Flat `key = value` configuration with `[input.N]` sections.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hp::{default_lambda, Frequency};
use crate::ingest::CsvSchema;
use crate::randomness::AcfMode;
use crate::series::{default_scheme, PeriodScheme};
use crate::unitroot::{AdfModel, AdfTarget};

pub const DEFAULT_ACF_LAGS: usize = 20;
pub const DEFAULT_SEED: u64 = 20_160_408;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Markdown,
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Markdown => "markdown",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Comma-separated list of formats; duplicates collapse and order is fixed.
pub fn parse_formats(s: &str) -> Result<Vec<OutputFormat>> {
    let mut out: Vec<OutputFormat> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("at least one output format is required".into()));
    }
    Ok(out)
}

/// A positive λ or a frequency keyword resolved through the `100 · PV²` rule.
pub fn parse_lambda(s: &str) -> Result<f64> {
    if let Ok(freq) = s.parse::<Frequency>() {
        return Ok(default_lambda(freq));
    }
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(Error::Config(format!(
            "hp_lambda must be a non-negative number or daily|monthly|quarterly|annual, got '{s}'"
        ))),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("'{key}' expects a boolean, got '{s}'"))),
    }
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{key}' expects a non-negative integer, got '{s}'")))
}

fn parse_char(key: &str, s: &str) -> Result<char> {
    let s = s.trim();
    let unquoted = s
        .strip_prefix('"')
        .and_then(|x| x.strip_suffix('"'))
        .or_else(|| s.strip_prefix('\'').and_then(|x| x.strip_suffix('\'')))
        .unwrap_or(s);
    let value = match unquoted {
        "tab" | "\\t" => "\t",
        "semicolon" => ";",
        "comma" => ",",
        other => other,
    };
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Config(format!("'{key}' expects a single character, got '{s}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub schema: CsvSchema,
    pub index_name: String,
}

impl InputSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let index_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "INDEX".into());
        InputSpec {
            path,
            schema: CsvSchema::default(),
            index_name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub inputs: Vec<InputSpec>,
    pub scheme: PeriodScheme,
    pub acf_mode: AcfMode,
    pub acf_lags: usize,
    pub ljung_box_horizon: usize,
    pub adf_model: AdfModel,
    pub adf_target: AdfTarget,
    /// `None` selects the default lag rule per period.
    pub adf_lags: Option<usize>,
    pub hp_lambda: f64,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub plots: bool,
    pub mc_validate: bool,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            inputs: Vec::new(),
            scheme: default_scheme(),
            acf_mode: AcfMode::PaperTable,
            acf_lags: DEFAULT_ACF_LAGS,
            ljung_box_horizon: DEFAULT_ACF_LAGS,
            adf_model: AdfModel::DriftTrend,
            adf_target: AdfTarget::Returns,
            adf_lags: None,
            hp_lambda: default_lambda(Frequency::Daily),
            output_dir: PathBuf::from("effitest-out"),
            formats: vec![OutputFormat::Markdown, OutputFormat::Csv, OutputFormat::Json],
            plots: true,
            mc_validate: false,
            seed: DEFAULT_SEED,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() || self.inputs.len() > 2 {
            return Err(Error::Config(format!("expected one or two inputs, got {}", self.inputs.len())));
        }
        for input in &self.inputs {
            input.schema.validate().map_err(|e| match e {
                Error::Schema(m) => Error::Config(format!("input '{}': {m}", input.index_name)),
                other => other,
            })?;
            if input.index_name.trim().is_empty() {
                return Err(Error::Config("index name must not be empty".into()));
            }
        }
        if self.inputs.len() == 2 && self.inputs[0].index_name == self.inputs[1].index_name {
            return Err(Error::Config("the two inputs need distinct index names".into()));
        }
        if self.acf_lags == 0 {
            return Err(Error::Config("acf_lags must be at least 1".into()));
        }
        if self.ljung_box_horizon == 0 || self.ljung_box_horizon > self.acf_lags {
            return Err(Error::Config(format!(
                "ljung_box_horizon must lie in 1..={}, got {}",
                self.acf_lags, self.ljung_box_horizon
            )));
        }
        if !(self.hp_lambda.is_finite() && self.hp_lambda >= 0.0) {
            return Err(Error::Config(format!("hp_lambda must be finite and >= 0, got {}", self.hp_lambda)));
        }
        if self.formats.is_empty() {
            return Err(Error::Config("at least one output format is required".into()));
        }
        Ok(())
    }

    /// Applies one top-level key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "scheme" => self.scheme = PeriodScheme::parse(v)?,
            "acf_mode" => self.acf_mode = v.parse()?,
            "acf_lags" => self.acf_lags = parse_usize(key, v)?,
            "ljung_box_horizon" | "lb_horizon" => self.ljung_box_horizon = parse_usize(key, v)?,
            "adf_model" => self.adf_model = v.parse()?,
            "adf_target" => self.adf_target = v.parse()?,
            "adf_lags" => {
                self.adf_lags = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_usize(key, v)?)
                }
            }
            "hp_lambda" => self.hp_lambda = parse_lambda(v)?,
            "output_dir" | "out" => self.output_dir = PathBuf::from(v),
            "formats" => self.formats = parse_formats(v)?,
            "plots" => self.plots = parse_bool(key, v)?,
            "mc_validate" => self.mc_validate = parse_bool(key, v)?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::Config(format!("'seed' expects an unsigned 64-bit integer, got '{v}'")))?
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses config text. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        Self::parse_onto(AnalysisConfig::default(), text, base_dir)
    }

    /// Like [`AnalysisConfig::parse`], starting from `defaults` instead of
    /// the built-in defaults.
    pub fn parse_onto(defaults: AnalysisConfig, text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = defaults;
        let mut sections: BTreeMap<u32, Vec<(usize, String, String)>> = BTreeMap::new();
        let mut current: Option<u32> = None;
        let mut output_dir_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let n = inner
                    .trim()
                    .strip_prefix("input.")
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| Error::Config(format!("line {line_no}: unknown section '[{inner}]'")))?;
                if sections.contains_key(&n) {
                    return Err(Error::Config(format!("line {line_no}: duplicate section [input.{n}]")));
                }
                sections.insert(n, Vec::new());
                current = Some(n);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected 'key = value'")))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim().to_string());
            match current {
                Some(n) => sections.get_mut(&n).expect("section registered").push((line_no, key, value)),
                None => {
                    output_dir_set |= matches!(key.as_str(), "output_dir" | "out");
                    cfg.set(&key, &value)
                        .map_err(|e| Error::Config(format!("line {line_no}: {}", strip_config_prefix(&e))))?;
                }
            }
        }
        for (n, entries) in sections {
            cfg.inputs.push(parse_input(n, &entries, base_dir)?);
        }
        if output_dir_set && cfg.output_dir.is_relative() {
            cfg.output_dir = base_dir.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_file_onto(AnalysisConfig::default(), path)
    }

    pub fn from_file_onto(defaults: AnalysisConfig, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse_onto(defaults, &text, base)
    }

    /// Text form accepted by [`AnalysisConfig::parse`]; input paths are
    /// written as given.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let formats: Vec<String> = self.formats.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!("scheme = {}\n", self.scheme));
        out.push_str(&format!("acf_mode = {}\n", self.acf_mode));
        out.push_str(&format!("acf_lags = {}\n", self.acf_lags));
        out.push_str(&format!("ljung_box_horizon = {}\n", self.ljung_box_horizon));
        out.push_str(&format!("adf_model = {}\n", self.adf_model));
        out.push_str(&format!("adf_target = {}\n", self.adf_target));
        out.push_str(&format!(
            "adf_lags = {}\n",
            self.adf_lags.map(|q| q.to_string()).unwrap_or_else(|| "auto".into())
        ));
        out.push_str(&format!("hp_lambda = {}\n", self.hp_lambda));
        out.push_str(&format!("output_dir = {}\n", self.output_dir.display()));
        out.push_str(&format!("formats = {}\n", formats.join(",")));
        out.push_str(&format!("plots = {}\n", self.plots));
        out.push_str(&format!("mc_validate = {}\n", self.mc_validate));
        out.push_str(&format!("seed = {}\n", self.seed));
        for (i, input) in self.inputs.iter().enumerate() {
            let s = &input.schema;
            out.push_str(&format!("\n[input.{}]\n", i + 1));
            out.push_str(&format!("path = {}\n", input.path.display()));
            out.push_str(&format!("index_name = {}\n", input.index_name));
            out.push_str(&format!("date_column = {}\n", s.date_column));
            out.push_str(&format!("price_column = {}\n", s.price_column));
            out.push_str(&format!("price_fallback = {}\n", s.price_fallback.as_deref().unwrap_or("none")));
            out.push_str(&format!("date_format = {}\n", s.date_format));
            out.push_str(&format!("decimal_separator = {}\n", s.decimal_separator));
            out.push_str(&format!("delimiter = {}\n", char_name(s.delimiter)));
        }
        out
    }
}

fn char_name(c: char) -> String {
    match c {
        '\t' => "tab".into(),
        ';' => "semicolon".into(),
        ',' => "comma".into(),
        other => other.to_string(),
    }
}

fn strip_config_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

fn parse_input(n: u32, entries: &[(usize, String, String)], base_dir: &Path) -> Result<InputSpec> {
    let mut path = None;
    let mut index_name = None;
    let mut schema = CsvSchema::default();
    for (line_no, key, value) in entries {
        let err = |m: String| Error::Config(format!("line {line_no}: [input.{n}] {m}"));
        match key.as_str() {
            "path" => path = Some(PathBuf::from(value)),
            "index_name" | "name" => index_name = Some(value.clone()),
            "date_column" | "date_col" => schema.date_column = value.clone(),
            "price_column" | "price_col" => {
                schema.price_column = value.clone();
                schema.price_fallback = None;
            }
            "price_fallback" => {
                schema.price_fallback = if value.eq_ignore_ascii_case("none") || value.is_empty() {
                    None
                } else {
                    Some(value.clone())
                }
            }
            "date_format" => schema.date_format = value.clone(),
            "decimal_separator" => schema.decimal_separator = parse_char(key, value).map_err(|e| err(strip_config_prefix(&e)))?,
            "delimiter" => schema.delimiter = parse_char(key, value).map_err(|e| err(strip_config_prefix(&e)))?,
            other => return Err(err(format!("unknown key '{other}'"))),
        }
    }
    let path = path.ok_or_else(|| Error::Config(format!("[input.{n}] has no 'path'")))?;
    let path = if path.is_relative() { base_dir.join(path) } else { path };
    let mut spec = InputSpec::new(path);
    spec.schema = schema;
    if let Some(name) = index_name {
        spec.index_name = name;
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two markets
scheme = default
acf_mode = appendix
hp_lambda = quarterly
formats = json, markdown
plots = false
output_dir = out

[input.1]
path = data/a.csv
index_name = AAA

[input.2]
path = /abs/b.csv
price_column = Close
date_format = %d/%m/%Y
decimal_separator = ,
delimiter = semicolon
";

    #[test]
    fn parses_sections_and_resolves_paths() {
        let cfg = AnalysisConfig::parse(SAMPLE, Path::new("/base")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.acf_mode, AcfMode::Appendix);
        assert_eq!(cfg.hp_lambda, 1600.0);
        assert_eq!(cfg.formats, vec![OutputFormat::Markdown, OutputFormat::Json]);
        assert!(!cfg.plots);
        assert_eq!(cfg.output_dir, PathBuf::from("/base/out"));
        assert_eq!(cfg.inputs[0].path, PathBuf::from("/base/data/a.csv"));
        assert_eq!(cfg.inputs[0].index_name, "AAA");
        assert_eq!(cfg.inputs[1].index_name, "b");
        assert_eq!(cfg.inputs[1].schema.price_fallback, None);
        assert_eq!(cfg.inputs[1].schema.delimiter, ';');
        assert_eq!(cfg.inputs[1].schema.decimal_separator, ',');
    }

    #[test]
    fn text_round_trip() {
        let cfg = AnalysisConfig::parse(SAMPLE, Path::new("/base")).unwrap();
        let again = AnalysisConfig::parse(&cfg.to_config_text(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_lines() {
        let base = Path::new(".");
        for bad in [
            "nonsense",
            "colour = blue",
            "[output]",
            "acf_mode = weird",
            "plots = maybe",
            "[input.1]\nfoo = bar",
            "[input.1]\nindex_name = x",
            "[input.1]\npath = a\n[input.1]\npath = b",
        ] {
            assert!(matches!(AnalysisConfig::parse(bad, base), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn validation() {
        let mut cfg = AnalysisConfig::default();
        assert!(cfg.validate().is_err());
        cfg.inputs.push(InputSpec::new("x.csv"));
        cfg.validate().unwrap();
        cfg.ljung_box_horizon = 21;
        assert!(cfg.validate().is_err());
        cfg.ljung_box_horizon = 10;
        cfg.inputs.push(InputSpec::new("x.csv"));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lambda_keywords() {
        assert_eq!(parse_lambda("daily").unwrap(), 13_322_500.0);
        assert_eq!(parse_lambda("250").unwrap(), 250.0);
        assert!(parse_lambda("-1").is_err());
    }
}
