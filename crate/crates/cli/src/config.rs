//! Layered settings: command-line flags over a `key = value` file over built-in defaults.

use std::path::Path;

use foliage::texture::IdmForm;
use foliage::{Error, Measure, Result, Weights};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub measures: Option<Vec<Measure>>,
    pub weights: Option<Weights>,
    pub top_k: Option<usize>,
    pub gray_levels: Option<usize>,
    pub radial_bins: Option<usize>,
    pub angular_bins: Option<usize>,
    pub idm_form: Option<IdmForm>,
    pub epsilon: Option<f64>,
    pub refs_per_class: Option<Vec<usize>>,
    pub queries_per_class: Option<usize>,
    pub rpp_depth: Option<usize>,
}

impl Settings {
    /// Values set in `self` win; unset ones fall back to `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            measures: self.measures.or(lower.measures),
            weights: self.weights.or(lower.weights),
            top_k: self.top_k.or(lower.top_k),
            gray_levels: self.gray_levels.or(lower.gray_levels),
            radial_bins: self.radial_bins.or(lower.radial_bins),
            angular_bins: self.angular_bins.or(lower.angular_bins),
            idm_form: self.idm_form.or(lower.idm_form),
            epsilon: self.epsilon.or(lower.epsilon),
            refs_per_class: self.refs_per_class.or(lower.refs_per_class),
            queries_per_class: self.queries_per_class.or(lower.queries_per_class),
            rpp_depth: self.rpp_depth.or(lower.rpp_depth),
        }
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Settings::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", n + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            let bad = |what: &str| Error::InvalidInput(format!("config line {}: invalid {what} `{value}`", n + 1));
            match key.as_str() {
                "measure" => s.measures = Some(parse_list(value, |v| v.parse::<Measure>().ok()).ok_or_else(|| bad("measure"))?),
                "weights" => s.weights = Some(value.parse()?),
                "top-k" => s.top_k = Some(parse_positive(value).ok_or_else(|| bad("top-k"))?),
                "gray-levels" => s.gray_levels = Some(parse_positive(value).ok_or_else(|| bad("gray-levels"))?),
                "radial-bins" => s.radial_bins = Some(parse_positive(value).ok_or_else(|| bad("radial-bins"))?),
                "angular-bins" => s.angular_bins = Some(parse_positive(value).ok_or_else(|| bad("angular-bins"))?),
                "idm-form" => s.idm_form = Some(parse_idm_form(value).map_err(|_| bad("idm-form"))?),
                "epsilon" => s.epsilon = Some(parse_epsilon(value).map_err(|_| bad("epsilon"))?),
                "refs-per-class" => {
                    s.refs_per_class = Some(parse_list(value, parse_positive).ok_or_else(|| bad("refs-per-class"))?)
                }
                "queries-per-class" => {
                    s.queries_per_class = Some(parse_positive(value).ok_or_else(|| bad("queries-per-class"))?)
                }
                "rpp-depth" => s.rpp_depth = Some(parse_positive(value).ok_or_else(|| bad("rpp-depth"))?),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "config line {}: unknown key `{other}`",
                        n + 1
                    )))
                }
            }
        }
        Ok(s)
    }
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let items: Option<Vec<T>> = value.split(',').map(|v| f(v.trim())).collect();
    items.filter(|v| !v.is_empty())
}

fn parse_positive(value: &str) -> Option<usize> {
    value.parse().ok().filter(|&n: &usize| n > 0)
}

pub fn parse_idm_form(value: &str) -> std::result::Result<IdmForm, String> {
    match value {
        "literal" => Ok(IdmForm::Literal),
        "conventional" => Ok(IdmForm::Conventional),
        _ => Err(format!("unknown IDM form `{value}` (expected literal or conventional)")),
    }
}

pub fn parse_epsilon(value: &str) -> std::result::Result<f64, String> {
    match value.parse::<f64>() {
        Ok(e) if e > 0.0 && e.is_finite() => Ok(e),
        _ => Err(format!("epsilon must be a positive number, got `{value}`")),
    }
}
