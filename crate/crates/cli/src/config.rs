use std::path::Path;

use coarma_core::evaluation::ForecastModel;
use coarma_core::{CoarmaError, ModelTemplate, Result};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelsFile {
    model: Vec<ModelEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelEntry {
    name: String,
    class: Option<String>,
    spec: Option<String>,
    arma: Option<ArmaEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmaEntry {
    #[serde(default = "five")]
    max_p: usize,
    #[serde(default = "five")]
    max_q: usize,
}

fn five() -> usize {
    5
}

/// Parses a models file:
///
/// ```toml
/// [[model]]
/// name = "kde-ar1"
/// class = "CoARMA"
/// spec = "kde-AR(1)-(n)"
///
/// [[model]]
/// name = "gauss-arma"
/// arma = { max_p = 5, max_q = 5 }
/// ```
pub fn parse_models(text: &str) -> Result<Vec<ForecastModel>> {
    let file: ModelsFile = toml::from_str(text).map_err(|e| CoarmaError::Parse {
        pos: e.span().map_or(0, |s| s.start),
        msg: e.message().to_string(),
    })?;
    if file.model.is_empty() {
        return Err(CoarmaError::Domain("models file lists no models".into()));
    }
    let mut names = std::collections::HashSet::new();
    file.model
        .into_iter()
        .map(|m| {
            if !names.insert(m.name.clone()) {
                return Err(CoarmaError::Domain(format!("duplicate model name '{}'", m.name)));
            }
            match (m.spec, m.arma) {
                (Some(s), None) => {
                    let template: ModelTemplate = s.parse()?;
                    Ok(ForecastModel::Coarma { name: m.name, class: m.class.unwrap_or_else(|| "CoARMA".into()), template })
                }
                (None, Some(a)) => Ok(ForecastModel::GaussianArma {
                    name: m.name,
                    class: m.class.unwrap_or_else(|| "ARMA".into()),
                    max_p: a.max_p,
                    max_q: a.max_q,
                }),
                _ => Err(CoarmaError::Domain(format!("model '{}' needs exactly one of `spec` or `arma`", m.name))),
            }
        })
        .collect()
}

pub fn load_models(path: &Path) -> Result<Vec<ForecastModel>> {
    let text = std::fs::read_to_string(path).map_err(|e| CoarmaError::Io(format!("{}: {e}", path.display())))?;
    parse_models(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_kinds() {
        let m = parse_models(
            "[[model]]\nname = \"a\"\nspec = \"kde-AR(1)-(n)\"\n\n[[model]]\nname = \"b\"\narma = { max_p = 2 }\n",
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].class(), "CoARMA");
        assert!(matches!(m[1], ForecastModel::GaussianArma { max_p: 2, max_q: 5, .. }));
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(parse_models("[[model]]\nname = \"a\"\n").is_err());
        assert!(parse_models("[[model]]\nname = \"a\"\nspec = \"n-AR(2)-(n)\"\n").is_err());
        assert!(parse_models("[[model]]\nname = \"a\"\nspec = \"n-AR(1)-(n)\"\nbogus = 1\n").is_err());
        assert!(parse_models("model = []").is_err());
    }
}
