use std::collections::BTreeSet;

use super::StyleSpec;

/// Greedy set cover over the fields each style renders.
///
/// Repeatedly takes the style covering the most still-uncovered fields, breaking ties
/// by the lexicographically smaller id, until the union of all covered fields is reached.
/// The result is in selection order.
pub fn select_covering_styles(styles: &[StyleSpec]) -> Vec<StyleSpec> {
    let covers: Vec<BTreeSet<String>> = styles.iter().map(StyleSpec::covered_fields).collect();
    let mut uncovered: BTreeSet<&String> = covers.iter().flatten().collect();
    let mut used = vec![false; styles.len()];
    let mut selected = Vec::new();

    while !uncovered.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for (i, cover) in covers.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = cover.iter().filter(|f| uncovered.contains(f)).count();
            let better = match best {
                None => gain > 0,
                Some((b, best_gain)) => {
                    gain > best_gain || (gain == best_gain && styles[i].id < styles[b].id)
                }
            };
            if better {
                best = Some((i, gain));
            }
        }
        let Some((i, _)) = best else { break };
        used[i] = true;
        for f in &covers[i] {
            uncovered.remove(f);
        }
        selected.push(styles[i].clone());
    }
    selected
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::style::{FieldDirective, NameFormat, StyleOptions, Transform};

    fn style(id: &str, fields: &[&str]) -> StyleSpec {
        StyleSpec {
            id: id.into(),
            name_format: NameFormat::Full,
            options: StyleOptions::default(),
            terminator: ".".into(),
            templates: BTreeMap::from([(
                "default".to_string(),
                fields
                    .iter()
                    .map(|f| FieldDirective::new(f, Transform::Verbatim, "", ". ", false))
                    .collect(),
            )]),
        }
    }

    fn ids(v: &[StyleSpec]) -> Vec<&str> {
        v.iter().map(|s| s.id.as_str()).collect()
    }

    #[test]
    fn superset_style_alone() {
        let styles = [
            style("s1", &["author", "title"]),
            style("s2", &["title", "year"]),
            style("s3", &["author", "year"]),
            style("s4", &["author", "title", "year"]),
        ];
        assert_eq!(ids(&select_covering_styles(&styles)), ["s4"]);
    }

    #[test]
    fn single_style() {
        let styles = [style("only", &["title"])];
        assert_eq!(ids(&select_covering_styles(&styles)), ["only"]);
    }

    #[test]
    fn disjoint_sets_all_selected() {
        let styles = [style("c", &["year"]), style("a", &["author"]), style("b", &["title"])];
        assert_eq!(ids(&select_covering_styles(&styles)), ["a", "b", "c"]);
    }

    #[test]
    fn ties_prefer_smaller_id() {
        let styles = [style("zeta", &["author", "title"]), style("alpha", &["title", "year"])];
        assert_eq!(ids(&select_covering_styles(&styles)), ["alpha", "zeta"]);
    }
}
