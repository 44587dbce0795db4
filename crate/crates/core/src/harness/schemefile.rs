//! The JSON scheme format:
//!
//! ```json
//! {"n": 2, "points": [["1","0","0"], ["1","2/3","5"]], "multiplicities": [2, 1]}
//! ```
//!
//! Coordinates are strings holding an integer or a fraction "p/q"; bare
//! JSON integers are accepted too. Errors name the offending JSON path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{parse_rational, ProjPoint};
use crate::scheme::FatPointScheme;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum Coordinate {
    Text(String),
    Integer(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub n: usize,
    points: Vec<Vec<Coordinate>>,
    pub multiplicities: Vec<u32>,
}

fn input_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Input {
        path: path.into(),
        message: message.into(),
    }
}

impl SchemeFile {
    pub fn from_scheme(z: &FatPointScheme) -> Self {
        Self {
            n: z.n(),
            points: z
                .points()
                .iter()
                .map(|p| p.integer_coords().iter().map(|c| Coordinate::Text(c.to_string())).collect())
                .collect(),
            multiplicities: z.mults().to_vec(),
        }
    }

    pub fn to_scheme(&self) -> Result<FatPointScheme> {
        if self.points.is_empty() {
            return Err(input_error("points", "at least one point is required"));
        }
        if self.points.len() != self.multiplicities.len() {
            return Err(input_error(
                "multiplicities",
                format!(
                    "{} multiplicities for {} points",
                    self.multiplicities.len(),
                    self.points.len()
                ),
            ));
        }
        let mut points = Vec::with_capacity(self.points.len());
        for (i, row) in self.points.iter().enumerate() {
            if row.len() != self.n + 1 {
                return Err(input_error(
                    format!("points[{i}]"),
                    format!("expected {} coordinates for n = {}, found {}", self.n + 1, self.n, row.len()),
                ));
            }
            let mut coords = Vec::with_capacity(row.len());
            for (k, c) in row.iter().enumerate() {
                let value = match c {
                    Coordinate::Integer(v) => Some(crate::linalg::rat(*v)),
                    Coordinate::Text(s) => parse_rational(s),
                };
                coords.push(value.ok_or_else(|| {
                    input_error(format!("points[{i}][{k}]"), format!("not a rational number: {c:?}"))
                })?);
            }
            let p = ProjPoint::new(coords)
                .map_err(|_| input_error(format!("points[{i}]"), "all coordinates are zero"))?;
            if let Some(first) = points.iter().position(|q| q == &p) {
                return Err(input_error(format!("points[{i}]"), format!("duplicates points[{first}]")));
            }
            points.push(p);
        }
        if let Some(i) = self.multiplicities.iter().position(|&m| m == 0) {
            return Err(input_error(format!("multiplicities[{i}]"), "multiplicity must be positive"));
        }
        FatPointScheme::new(points, self.multiplicities.clone())
            .map_err(|e| input_error("scheme", e.to_string()))
    }
}

/// Canonical JSON for a scheme.
pub fn scheme_to_json(z: &FatPointScheme) -> String {
    serde_json::to_string_pretty(&SchemeFile::from_scheme(z)).expect("scheme files serialize")
}

/// Parses scheme JSON; `origin` labels syntax errors.
pub fn parse_scheme(text: &str, origin: &str) -> Result<FatPointScheme> {
    let file: SchemeFile = serde_json::from_str(text).map_err(|e| {
        input_error(
            format!("{origin}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    file.to_scheme()
}

pub fn read_scheme(path: &Path) -> Result<FatPointScheme> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| input_error(origin.clone(), e.to_string()))?;
    parse_scheme(&text, &origin)
}

pub fn write_scheme(path: &Path, z: &FatPointScheme) -> Result<()> {
    std::fs::write(path, scheme_to_json(z) + "\n")
        .map_err(|e| input_error(path.display().to_string(), e.to_string()))
}
