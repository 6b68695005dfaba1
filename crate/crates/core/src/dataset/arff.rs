//! Reader for the subset of ARFF used by MULAN multi-label datasets, plus the
//! companion XML file that names the label attributes.

use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;
use regex::Regex;

use super::MultiLabelDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone)]
pub(crate) struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Raw ARFF contents: attribute declarations and data rows as strings.
#[derive(Debug)]
pub(crate) struct ArffFile {
    pub relation: String,
    pub attributes: Vec<Attribute>,
    pub rows: Vec<(usize, Vec<Option<String>>)>,
}

/// Reads label names from a MULAN `labels.xml`; nested (hierarchical) labels are flattened.
pub fn read_label_names(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_label_xml(&text, path)
}

pub(crate) fn parse_label_xml(text: &str, path: &Path) -> Result<Vec<String>> {
    let re = Regex::new(r#"<label\s+name\s*=\s*(?:"([^"]*)"|'([^']*)')"#).expect("static regex");
    let names: Vec<String> = re
        .captures_iter(text)
        .map(|c| {
            let raw = c
                .get(1)
                .or_else(|| c.get(2))
                .map(|m| m.as_str())
                .unwrap_or("");
            unescape_xml(raw)
        })
        .collect();
    if names.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no <label name=...> elements found".into(),
        });
    }
    Ok(names)
}

fn unescape_xml(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

pub(crate) fn read_arff(path: &Path) -> Result<ArffFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_arff(&text, path)
}

pub(crate) fn parse_arff(text: &str, path: &Path) -> Result<ArffFile> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut relation = String::new();
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                relation = unquote(line["@relation".len()..].trim()).to_string();
            } else if lower.starts_with("@attribute") {
                let attr = parse_attribute(line["@attribute".len()..].trim())
                    .map_err(|m| perr(lineno, m))?;
                attributes.push(attr);
            } else if lower.starts_with("@data") {
                if attributes.is_empty() {
                    return Err(perr(lineno, "@data before any @attribute".into()));
                }
                in_data = true;
            } else {
                return Err(perr(lineno, format!("unexpected header line: {line}")));
            }
            continue;
        }

        let values = if line.starts_with('{') {
            parse_sparse_row(line, &attributes).map_err(|m| perr(lineno, m))?
        } else {
            let fields = split_fields(line);
            if fields.len() != attributes.len() {
                return Err(perr(
                    lineno,
                    format!(
                        "expected {} values, found {}",
                        attributes.len(),
                        fields.len()
                    ),
                ));
            }
            fields.into_iter().map(Some).collect()
        };
        rows.push((lineno, values));
    }

    if !in_data {
        return Err(perr(0, "missing @data section".into()));
    }
    Ok(ArffFile {
        relation,
        attributes,
        rows,
    })
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    if s.len() >= 2
        && ((s.starts_with('\'') && s.ends_with('\'')) || (s.starts_with('"') && s.ends_with('"')))
    {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// Splits off a leading name token, honouring single or double quotes.
fn split_name(s: &str) -> Option<(String, &str)> {
    let s = s.trim_start();
    let first = s.chars().next()?;
    if first == '\'' || first == '"' {
        let end = s[1..].find(first)? + 1;
        Some((s[1..end].to_string(), &s[end + 1..]))
    } else {
        let end = s
            .find(|c: char| c.is_whitespace() || c == '{')
            .unwrap_or(s.len());
        Some((s[..end].to_string(), &s[end..]))
    }
}

fn parse_attribute(decl: &str) -> std::result::Result<Attribute, String> {
    let (name, rest) = split_name(decl).ok_or_else(|| format!("bad attribute: {decl}"))?;
    if name.is_empty() {
        return Err(format!("empty attribute name: {decl}"));
    }
    let ty = rest.trim();
    let lower = ty.to_ascii_lowercase();
    let kind = if lower == "numeric" || lower == "real" || lower == "integer" {
        AttributeKind::Numeric
    } else if ty.starts_with('{') && ty.ends_with('}') {
        let values: Vec<String> = split_fields(&ty[1..ty.len() - 1]);
        if values.is_empty() {
            return Err(format!("nominal attribute {name} has no values"));
        }
        AttributeKind::Nominal(values)
    } else {
        return Err(format!("unsupported type for attribute {name}: {ty}"));
    };
    Ok(Attribute { name, kind })
}

/// Comma split that respects quotes and trims whitespace.
fn split_fields(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    for c in s.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == ',' => {
                out.push(cur.trim().to_string());
                cur.clear();
            }
            None => cur.push(c),
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_sparse_row(
    line: &str,
    attributes: &[Attribute],
) -> std::result::Result<Vec<Option<String>>, String> {
    let inner = line
        .strip_prefix('{')
        .and_then(|l| l.strip_suffix('}'))
        .ok_or_else(|| format!("unterminated sparse row: {line}"))?;
    let mut values = vec![None; attributes.len()];
    for entry in split_fields(inner) {
        if entry.is_empty() {
            continue;
        }
        let mut parts = entry.splitn(2, char::is_whitespace);
        let idx: usize = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| format!("bad sparse index in {entry:?}"))?;
        let value = parts
            .next()
            .map(|v| unquote(v.trim()).to_string())
            .ok_or_else(|| format!("missing sparse value in {entry:?}"))?;
        if idx >= attributes.len() {
            return Err(format!("sparse index {idx} out of range"));
        }
        values[idx] = Some(value);
    }
    Ok(values)
}

/// Converts a parsed ARFF into a multi-label dataset. Label columns must hold 0/1;
/// nominal feature columns are one-hot encoded; sparse gaps take the implicit zero
/// (numeric 0, or the first nominal value).
pub(crate) fn to_dataset(
    arff: ArffFile,
    label_names: &[String],
    name: String,
    path: &Path,
) -> Result<MultiLabelDataset> {
    let mut seen = HashSet::new();
    for l in label_names {
        if !seen.insert(l.as_str()) {
            return Err(Error::Data(format!(
                "duplicate label name {l:?} in label file"
            )));
        }
    }
    let label_set: HashSet<&str> = label_names.iter().map(String::as_str).collect();

    let mut label_cols = Vec::with_capacity(label_names.len());
    for l in label_names {
        let col = arff
            .attributes
            .iter()
            .position(|a| &a.name == l)
            .ok_or_else(|| Error::Data(format!("label {l:?} not declared in ARFF")))?;
        label_cols.push(col);
    }

    // (source attribute, Some(nominal index) for one-hot columns)
    let mut feature_cols: Vec<(usize, Option<usize>)> = Vec::new();
    let mut feature_names = Vec::new();
    for (i, a) in arff.attributes.iter().enumerate() {
        if label_set.contains(a.name.as_str()) {
            continue;
        }
        match &a.kind {
            AttributeKind::Numeric => {
                feature_cols.push((i, None));
                feature_names.push(a.name.clone());
            }
            AttributeKind::Nominal(vals) => {
                for (k, v) in vals.iter().enumerate() {
                    feature_cols.push((i, Some(k)));
                    feature_names.push(format!("{}={}", a.name, v));
                }
            }
        }
    }

    let n = arff.rows.len();
    let m = feature_cols.len();
    let q = label_cols.len();
    let mut x = Array2::<f64>::zeros((n, m));
    let mut y = Array2::<u8>::zeros((n, q));
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    for (r, (lineno, values)) in arff.rows.iter().enumerate() {
        for (c, &(src, onehot)) in feature_cols.iter().enumerate() {
            let attr = &arff.attributes[src];
            let raw = values[src].as_deref();
            if raw == Some("?") {
                return Err(perr(*lineno, format!("missing value for {}", attr.name)));
            }
            x[[r, c]] = match (&attr.kind, onehot) {
                (AttributeKind::Numeric, _) => match raw {
                    None => 0.0,
                    Some(s) => s.parse::<f64>().map_err(|_| {
                        perr(*lineno, format!("{s:?} is not numeric ({})", attr.name))
                    })?,
                },
                (AttributeKind::Nominal(vals), Some(k)) => {
                    let idx = match raw {
                        None => 0,
                        Some(s) => vals.iter().position(|v| v == s).ok_or_else(|| {
                            perr(*lineno, format!("{s:?} not a value of {}", attr.name))
                        })?,
                    };
                    if idx == k {
                        1.0
                    } else {
                        0.0
                    }
                }
                (AttributeKind::Nominal(_), None) => unreachable!("nominal features are one-hot"),
            };
        }
        for (c, &src) in label_cols.iter().enumerate() {
            let attr = &arff.attributes[src];
            let v = match values[src].as_deref() {
                None => match &attr.kind {
                    AttributeKind::Nominal(vals) => vals[0].as_str(),
                    AttributeKind::Numeric => "0",
                },
                Some(s) => s,
            };
            y[[r, c]] = match v.trim() {
                "0" | "0.0" => 0,
                "1" | "1.0" => 1,
                other => {
                    return Err(Error::Data(format!(
                        "line {lineno}: label {} has non-binary value {other:?}",
                        attr.name
                    )))
                }
            };
        }
    }

    MultiLabelDataset::new(name, x, y, feature_names, label_names.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.arff")
    }

    #[test]
    fn parses_quoted_names_and_nominals() {
        let a = parse_attribute("'my attr' {a, 'b c'}").unwrap();
        assert_eq!(a.name, "my attr");
        assert_eq!(
            a.kind,
            AttributeKind::Nominal(vec!["a".into(), "b c".into()])
        );
        let a = parse_attribute("x NUMERIC").unwrap();
        assert_eq!(a.kind, AttributeKind::Numeric);
        assert!(parse_attribute("x string").is_err());
        assert!(parse_attribute("y {0,1}").is_ok());
    }

    #[test]
    fn label_xml() {
        let xml = r#"<?xml version="1.0"?>
<labels xmlns="http://mulan.sourceforge.net/labels">
<label name="amazed-suprised"></label>
<label name='a&amp;b'><label name="child"/></label>
</labels>"#;
        let names = parse_label_xml(xml, p()).unwrap();
        assert_eq!(names, vec!["amazed-suprised", "a&b", "child"]);
        assert!(parse_label_xml("<labels/>", p()).is_err());
    }

    #[test]
    fn sparse_rows_expand_with_zeros() {
        let text = "@relation r\n@attribute f0 numeric\n@attribute f1 numeric\n@attribute l {0,1}\n@data\n{1 2.5, 2 1}\n{}\n";
        let arff = parse_arff(text, p()).unwrap();
        let d = to_dataset(arff, &["l".to_string()], "r".into(), p()).unwrap();
        assert_eq!(d.x().row(0).to_vec(), vec![0.0, 2.5]);
        assert_eq!(d.x().row(1).to_vec(), vec![0.0, 0.0]);
        assert_eq!(d.y().column(0).to_vec(), vec![1, 0]);
    }

    #[test]
    fn nominal_feature_is_one_hot() {
        let text = "% comment\n@RELATION r\n@ATTRIBUTE c {red,green,blue}\n@attribute l {0,1}\n@DATA\ngreen,1\nblue,0\n";
        let arff = parse_arff(text, p()).unwrap();
        let d = to_dataset(arff, &["l".to_string()], "r".into(), p()).unwrap();
        assert_eq!(d.feature_names(), &["c=red", "c=green", "c=blue"]);
        assert_eq!(d.x().row(0).to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(d.x().row(1).to_vec(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let hdr = "@relation r\n@attribute f numeric\n@attribute l {0,1,2}\n@data\n";
        let arff = parse_arff(&format!("{hdr}1.0,2\n"), p()).unwrap();
        assert!(matches!(
            to_dataset(arff, &["l".to_string()], "r".into(), p()),
            Err(Error::Data(_))
        ));

        let arff = parse_arff(&format!("{hdr}?,1\n"), p()).unwrap();
        assert!(to_dataset(arff, &["l".to_string()], "r".into(), p()).is_err());

        let arff = parse_arff(&format!("{hdr}1.0,1\n"), p()).unwrap();
        assert!(matches!(
            to_dataset(arff, &["missing".to_string()], "r".into(), p()),
            Err(Error::Data(_))
        ));

        assert!(parse_arff(&format!("{hdr}1.0\n"), p()).is_err());
        assert!(parse_arff("@relation r\n@attribute f date\n@data\n", p()).is_err());
        assert!(parse_arff("@relation r\n@attribute f numeric\n", p()).is_err());
    }
}
