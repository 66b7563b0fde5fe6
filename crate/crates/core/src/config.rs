//! Line-oriented sweep configuration.
//!
//! ```text
//! # two-spin ray through the factorizing circle
//! [model]
//! n = 2
//! boundary = periodic
//!
//! [curve]
//! delta = lambda*sin(pi/4)
//! h = lambda*cos(pi/4)
//!
//! [grid]
//! lambda_min = 0.5
//! lambda_max = 1.5
//! points = 101
//!
//! [measures]
//! list = coherence_l1, geometric_entanglement
//! ```
//!
//! Keys within a section may come in any order. Unknown sections or keys
//! are errors.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{Bipartition, ComplexMatrix};
use crate::measures::DistanceKind;
use crate::model::{Boundary, CurveSpec};
use crate::states::IncoherentBasis;
use crate::sweep::{BasisSpec, Grid, MeasureName, OutputSpec, SweepConfig, DEFAULT_STEPS};

const SECTIONS: [(&str, &[&str]); 6] = [
    ("model", &["n", "boundary", "split"]),
    ("curve", &["delta", "h", "beta"]),
    ("grid", &["lambda_min", "lambda_max", "points", "steps"]),
    ("measures", &["list", "distances"]),
    ("bases", &["list"]),
    ("output", &["csv", "report"]),
];

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn err(line: usize, section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    if key.is_empty() {
        Error::Config(format!("line {line}: [{section}] {msg}"))
    } else {
        Error::Config(format!("line {line}: {section}.{key}: {msg}"))
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {line}: unterminated section header")))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(Error::Config(format!("line {line}: unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(Error::Config(format!("line {line}: section [{name}] repeated")));
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let Some(section) = &current else {
            return Err(Error::Config(format!("line {line}: key outside of any section")));
        };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`")))?;
        let (key, value) = (key.trim(), value.trim());
        let allowed = SECTIONS.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
        let explicit_basis = section == "bases" && key.starts_with("explicit.");
        if !allowed.contains(&key) && !explicit_basis {
            return Err(err(line, section, key, "unknown key"));
        }
        let sec = sections.get_mut(section).expect("section inserted");
        if sec.entries.contains_key(key) {
            return Err(err(line, section, key, "repeated key"));
        }
        sec.entries.insert(key.to_string(), Entry { value: value.to_string(), line });
    }
    Ok(sections)
}

struct Doc {
    sections: BTreeMap<String, Section>,
}

impl Doc {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.entries.get(key)
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry> {
        match self.sections.get(section) {
            None => Err(Error::Config(format!("missing section [{section}] (needed for {section}.{key})"))),
            Some(s) => s.entries.get(key).ok_or_else(|| {
                Error::Config(format!("[{section}] starting at line {}: missing key {section}.{key}", s.line))
            }),
        }
    }

    fn number(&self, section: &str, key: &str, entry: &Entry) -> Result<f64> {
        parse_constant(&entry.value).map_err(|m| err(entry.line, section, key, m))
    }
}

/// A plain number or a constant expression such as `pi/4`.
fn parse_constant(text: &str) -> std::result::Result<f64, String> {
    if let Ok(v) = text.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(format!("`{text}` is not finite")) };
    }
    let e = Expr::parse(text).map_err(|e| e.to_string())?;
    if mentions_lambda(&e) {
        return Err(format!("`{text}` must not depend on lambda"));
    }
    e.eval(0.0).map_err(|e| e.to_string())
}

fn mentions_lambda(e: &Expr) -> bool {
    match e {
        Expr::Lambda => true,
        Expr::Num(_) | Expr::Pi | Expr::E => false,
        Expr::Neg(a) | Expr::Call(_, a) => mentions_lambda(a),
        Expr::Bin(_, a, b) => mentions_lambda(a) || mentions_lambda(b),
    }
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// `re` or `re:im`.
fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    match text.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse_constant(re)?, parse_constant(im)?)),
        None => Ok(Complex64::new(parse_constant(text)?, 0.0)),
    }
}

/// Rows separated by `;`, entries by whitespace. Columns are the basis vectors.
fn parse_basis_matrix(text: &str) -> std::result::Result<IncoherentBasis, String> {
    let rows: Vec<Vec<Complex64>> = text
        .split(';')
        .map(|r| r.split_whitespace().map(parse_complex).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!("matrix must be square, got {n} rows of unequal length"));
    }
    let m = ComplexMatrix::from_vec(n, n, rows.into_iter().flatten().collect()).map_err(|e| e.to_string())?;
    IncoherentBasis::new(m).map_err(|e| e.to_string())
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let doc = Doc { sections: split_sections(text)? };

    let n_entry = doc.require("model", "n")?;
    let n_sites: usize =
        n_entry.value.parse().map_err(|_| err(n_entry.line, "model", "n", "expected a positive integer"))?;
    if !(2..=crate::model::MAX_SITES).contains(&n_sites) {
        return Err(err(n_entry.line, "model", "n", format!("must be between 2 and {}", crate::model::MAX_SITES)));
    }
    let boundary = match doc.get("model", "boundary") {
        None => Boundary::Periodic,
        Some(e) => match e.value.as_str() {
            "periodic" => Boundary::Periodic,
            "open" => Boundary::Open,
            other => return Err(err(e.line, "model", "boundary", format!("expected periodic or open, got `{other}`"))),
        },
    };
    let split = match doc.get("model", "split") {
        None => Bipartition::contiguous(n_sites, n_sites / 2)?,
        Some(e) => {
            let k: usize = e.value.parse().map_err(|_| err(e.line, "model", "split", "expected an integer"))?;
            Bipartition::contiguous(n_sites, k).map_err(|x| err(e.line, "model", "split", x))?
        }
    };

    let lo_e = doc.require("grid", "lambda_min")?;
    let hi_e = doc.require("grid", "lambda_max")?;
    let pts_e = doc.require("grid", "points")?;
    let lambda_min = doc.number("grid", "lambda_min", lo_e)?;
    let lambda_max = doc.number("grid", "lambda_max", hi_e)?;
    if lambda_min >= lambda_max {
        return Err(err(hi_e.line, "grid", "lambda_max", "must exceed grid.lambda_min"));
    }
    let points: usize =
        pts_e.value.parse().map_err(|_| err(pts_e.line, "grid", "points", "expected a positive integer"))?;
    if points < 3 {
        return Err(err(pts_e.line, "grid", "points", "need at least 3 points"));
    }
    let grid = Grid { lambda_min, lambda_max, points };
    let steps = match doc.get("grid", "steps") {
        None => DEFAULT_STEPS.to_vec(),
        Some(e) => list(&e.value)
            .into_iter()
            .map(|s| parse_constant(s).map_err(|m| err(e.line, "grid", "steps", m)))
            .collect::<Result<Vec<_>>>()?,
    };

    let expr_of = |key: &str| -> Result<Expr> {
        let e = doc.require("curve", key)?;
        Expr::parse(&e.value).map_err(|x| err(e.line, "curve", key, x))
    };
    let beta = match doc.get("curve", "beta") {
        None => None,
        Some(e) if e.value == crate::model::ZERO_TEMPERATURE => None,
        Some(e) => Some(Expr::parse(&e.value).map_err(|x| err(e.line, "curve", "beta", x))?),
    };
    let curve = CurveSpec { delta: expr_of("delta")?, h: expr_of("h")?, beta, lambda_min, lambda_max };

    let m_e = doc.require("measures", "list")?;
    let measures = list(&m_e.value)
        .into_iter()
        .map(|s| MeasureName::from_name(s).ok_or_else(|| err(m_e.line, "measures", "list", format!("unknown measure `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    if measures.is_empty() {
        return Err(err(m_e.line, "measures", "list", "no measures listed"));
    }
    let distances = match doc.get("measures", "distances") {
        None => vec![DistanceKind::Trace],
        Some(e) => list(&e.value)
            .into_iter()
            .map(|s| DistanceKind::from_name(s).ok_or_else(|| err(e.line, "measures", "distances", format!("unknown distance `{s}`"))))
            .collect::<Result<Vec<_>>>()?,
    };

    let mut bases = Vec::new();
    let listed = doc.get("bases", "list");
    if let Some(e) = listed {
        for name in list(&e.value) {
            bases.push(match name {
                "computational" => BasisSpec::Computational,
                "bell_type_2q" => BasisSpec::BellType2q,
                "theorem3_auto" => BasisSpec::Theorem3Auto,
                "parity_fourier_auto" => BasisSpec::ParityFourierAuto,
                other => return Err(err(e.line, "bases", "list", format!("unknown basis `{other}`"))),
            });
        }
    }
    if let Some(sec) = doc.sections.get("bases") {
        for (key, e) in sec.entries.iter().filter(|(k, _)| k.starts_with("explicit.")) {
            let label = &key["explicit.".len()..];
            if !valid_label(label) {
                return Err(err(e.line, "bases", key, "labels use letters, digits, `_`, `-` and `.`"));
            }
            let basis = parse_basis_matrix(&e.value).map_err(|m| err(e.line, "bases", key, m))?;
            bases.push(BasisSpec::Explicit { label: label.to_string(), basis });
        }
    }
    if listed.is_none() && bases.is_empty() {
        bases.push(BasisSpec::Computational);
    }

    let mut output = OutputSpec::default();
    if let Some(e) = doc.get("output", "csv") {
        output.csv = e.value.clone();
    }
    if let Some(e) = doc.get("output", "report") {
        output.report = e.value.clone();
    }
    for (key, name) in [("csv", &output.csv), ("report", &output.report)] {
        if name.is_empty() || name.contains('/') || name.contains('\\') {
            return Err(Error::Config(format!("output.{key}: expected a plain file name")));
        }
    }

    let config = SweepConfig { n_sites, boundary, split, curve, grid, steps, measures, bases, distances, output };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# two spins, ray at 45 degrees
[model]
n = 2

[curve]
delta = lambda*sin(pi/4)
h = lambda*cos(pi/4)

[grid]
lambda_min = 0.5
lambda_max = 1.5
points = 101

[measures]
list = coherence_l1
";

    #[test]
    fn minimal_config_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.n_sites, 2);
        assert_eq!(c.boundary, Boundary::Periodic);
        assert!(c.curve.beta.is_none());
        assert_eq!(c.steps, DEFAULT_STEPS.to_vec());
        assert_eq!(c.bases, vec![BasisSpec::Computational]);
        assert_eq!(c.distances, vec![DistanceKind::Trace]);
        assert_eq!(c.grid.points, 101);
    }

    #[test]
    fn missing_points_names_the_key() {
        let text = MINIMAL.replace("points = 101\n", "");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("grid.points"), "{e}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("n = 2\n", "n = 2\nflavor = strange\n");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("model.flavor") && e.contains("line 4"), "{e}");
    }

    #[test]
    fn malformed_inputs() {
        for (from, to) in [
            ("[model]", "[modle]"),
            ("n = 2", "n = two"),
            ("n = 2", "n = 2\nn = 3"),
            ("points = 101", "points = 2"),
            ("list = coherence_l1", "list = coherence_l2"),
            ("list = coherence_l1", "list ="),
            ("delta = lambda*sin(pi/4)", "delta = lambda*sin(pi/4"),
            ("lambda_max = 1.5", "lambda_max = 0.1"),
        ] {
            assert!(parse_config(&MINIMAL.replace(from, to)).is_err(), "{to}");
        }
    }

    #[test]
    fn full_config() {
        let text = "\
[output]
report = r.json
csv = rows.csv
[bases]
explicit.swap = 0 1 0 0; 1 0 0 0; 0 0 0.6 0.8; 0 0 0.8:0 -0.6
list = computational, theorem3_auto
[measures]
distances = trace, hs, l1
list = geometric_coherence, line_element
[grid]
steps = 1e-2, 5e-3
points = 11
lambda_max = pi/2
lambda_min = 0.5
[curve]
beta = 10*lambda
h = 0.5
delta = lambda
[model]
split = 1
boundary = open
n = 2
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.boundary, Boundary::Open);
        assert_eq!(c.output.csv, "rows.csv");
        assert_eq!(c.bases.len(), 3);
        assert_eq!(c.distances.len(), 3);
        assert!((c.grid.lambda_max - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(c.curve.beta.is_some());
        assert_eq!(c.static_channels().len(), 3 * 2 + 3);
    }

    #[test]
    fn bad_explicit_basis() {
        let text = format!("{MINIMAL}[bases]\nexplicit.skew = 1 1 0 0; 0 1 0 0; 0 0 1 0; 0 0 0 1\n");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("bases.explicit.skew"), "{e}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = MINIMAL.replace("n = 2", "n = 2   # two sites\n\n   # nothing here");
        assert_eq!(parse_config(&text).unwrap().n_sites, 2);
    }
}
