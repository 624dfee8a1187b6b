//! On-disk formats: grid functions (JSON header plus values), mass functions
//! and step profiles (CSV), isoperimetric profiles and cell sets (JSON).

use std::fmt;
use std::path::Path;

use rearr_core::isoperimetry::{phi_from_profile, ProfileKind};
use rearr_core::{Atom, GridFunction, GridGeometry, MassFunction, ProfileHandle, StepProfile};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{read_to_string, write, CliError, Result};

/// `f64` that survives JSON: non-finite values are written as the strings
/// `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy)]
pub struct Real(pub f64);

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 || (self.0.is_nan() && other.0.is_nan())
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Grid function file. Values are either inline or in a sibling text file
/// of numbers separated by commas or whitespace, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub dim: usize,
    pub spacing: f64,
    pub extents: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values_file: Option<String>,
}

impl GridFile {
    pub fn from_function(f: &GridFunction) -> Self {
        Self {
            dim: f.dim(),
            spacing: f.spacing(),
            extents: f.extents().to_vec(),
            values: Some(f.values().to_vec()),
            values_file: None,
        }
    }
}

pub fn parse_values(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let file: GridFile =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::parse(path, e))?;
    if file.dim != file.extents.len() {
        return Err(CliError::parse(
            path,
            format!("dim {} but {} extents", file.dim, file.extents.len()),
        ));
    }
    let values = match (file.values, file.values_file) {
        (Some(v), None) => v,
        (None, Some(name)) => {
            let side = path.parent().unwrap_or(Path::new("")).join(name);
            parse_values(&read_to_string(&side)?).map_err(|e| CliError::parse(&side, e))?
        }
        _ => {
            return Err(CliError::parse(
                path,
                "exactly one of `values` and `values_file` is required",
            ))
        }
    };
    let geometry =
        GridGeometry::new(file.spacing, file.extents).map_err(|e| CliError::parse(path, e))?;
    GridFunction::new(geometry, values).map_err(|e| CliError::parse(path, e))
}

pub fn grid_json(f: &GridFunction) -> String {
    serde_json::to_string(&GridFile::from_function(f)).expect("grid files always serialize")
}

pub fn write_grid(path: &Path, f: &GridFunction) -> Result<()> {
    write(path, grid_json(f))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn csv_pairs(path: &Path, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let text = read_to_string(path)?;
    let mut reader = csv_reader(&text);
    let found = reader.headers().map_err(|e| CliError::parse(path, e))?;
    if found.iter().collect::<Vec<_>>() != header {
        return Err(CliError::parse(
            path,
            format!("expected header {}, found {:?}", header.join(","), found),
        ));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<(f64, f64)>() {
        out.push(row.map_err(|e| CliError::parse(path, e))?);
    }
    Ok(out)
}

fn write_csv_pairs(
    path: &Path,
    header: [&str; 2],
    rows: impl Iterator<Item = (f64, f64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::parse(path, e);
    w.write_record(header).map_err(io)?;
    for (a, b) in rows {
        w.serialize((a, b)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::parse(path, e))?;
    write(path, bytes)
}

/// CSV rows `value,mass`.
pub fn read_mass(path: &Path) -> Result<MassFunction> {
    let rows = csv_pairs(path, ["value", "mass"])?;
    MassFunction::new(rows.into_iter().map(|(v, m)| Atom::new(v, m)).collect())
        .map_err(|e| CliError::parse(path, e))
}

pub fn write_mass(path: &Path, f: &MassFunction) -> Result<()> {
    write_csv_pairs(
        path,
        ["value", "mass"],
        f.atoms().iter().map(|a| (a.value, a.mass)),
    )
}

/// CSV rows `t_break,level`: the level holds on `(previous t_break, t_break]`,
/// starting from 0.
pub fn read_step(path: &Path) -> Result<StepProfile> {
    let rows = csv_pairs(path, ["t_break", "level"])?;
    let mut breakpoints = vec![0.0];
    breakpoints.extend(rows.iter().map(|r| r.0));
    let levels = rows.iter().map(|r| r.1).collect();
    StepProfile::new(breakpoints, levels).map_err(|e| CliError::parse(path, e))
}

pub fn write_step(path: &Path, s: &StepProfile) -> Result<()> {
    let rows = s.breakpoints()[1..]
        .iter()
        .copied()
        .zip(s.levels().iter().copied());
    write_csv_pairs(path, ["t_break", "level"], rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileRole {
    /// The file holds an isoperimetric profile `I`; `φ = t/I(t)`.
    #[default]
    Isoperimetric,
    /// The file holds `φ` itself.
    Phi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileShape {
    PowerLaw { coefficient: f64, exponent: f64 },
    Table { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    #[serde(flatten)]
    pub shape: ProfileShape,
    /// Absent means unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_max: Option<f64>,
    #[serde(default)]
    pub role: ProfileRole,
}

impl ProfileFile {
    pub fn from_handle(h: &ProfileHandle, role: ProfileRole) -> Self {
        let shape = match h.kind() {
            ProfileKind::PowerLaw {
                coefficient,
                exponent,
            } => ProfileShape::PowerLaw {
                coefficient: *coefficient,
                exponent: *exponent,
            },
            ProfileKind::Table { samples } => ProfileShape::Table {
                samples: samples.clone(),
            },
        };
        let domain_max = (h.domain_max() < f64::MAX).then_some(h.domain_max());
        Self {
            shape,
            domain_max,
            role,
        }
    }

    pub fn handle(&self) -> rearr_core::Result<ProfileHandle> {
        let dmax = self.domain_max.unwrap_or(f64::MAX);
        match &self.shape {
            ProfileShape::PowerLaw {
                coefficient,
                exponent,
            } => ProfileHandle::power_law(*coefficient, *exponent, dmax),
            ProfileShape::Table { samples } => ProfileHandle::table(samples.clone(), dmax),
        }
    }

    /// The Coulhon function this file describes.
    pub fn phi(&self) -> rearr_core::Result<ProfileHandle> {
        match self.role {
            ProfileRole::Phi => self.handle(),
            ProfileRole::Isoperimetric => phi_from_profile(&self.handle()?),
        }
    }
}

pub fn read_profile(path: &Path) -> Result<ProfileFile> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::parse(path, e))
}

pub fn write_profile(path: &Path, p: &ProfileFile) -> Result<()> {
    write(
        path,
        serde_json::to_string_pretty(p).expect("profiles serialize"),
    )
}

/// A cell set is a JSON array of flat indices.
pub fn read_cells(path: &Path) -> Result<Vec<usize>> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::parse(path, e))
}

pub fn write_cells(path: &Path, cells: &[usize]) -> Result<()> {
    write(
        path,
        serde_json::to_string(cells).expect("index lists serialize"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip() {
        for v in [0.0, -1.5, 1e300, f64::INFINITY, f64::NEG_INFINITY, f64::NAN] {
            let s = serde_json::to_string(&Real(v)).unwrap();
            assert_eq!(serde_json::from_str::<Real>(&s).unwrap(), Real(v), "{s}");
        }
        assert!(serde_json::from_str::<Real>("\"infinity\"").is_err());
    }

    #[test]
    fn values_text() {
        assert_eq!(
            parse_values("1, 2\n3.5 -4e-1").unwrap(),
            vec![1.0, 2.0, 3.5, -0.4]
        );
        assert!(parse_values("1,x").is_err());
    }

    #[test]
    fn profile_json_shapes() {
        let p: ProfileFile =
            serde_json::from_str(r#"{"kind":"power_law","coefficient":3.5,"exponent":0.5}"#)
                .unwrap();
        assert_eq!(p.role, ProfileRole::Isoperimetric);
        assert_eq!(p.handle().unwrap().eval(4.0), 7.0);
        let t: ProfileFile = serde_json::from_str(
            r#"{"kind":"table","samples":[[0,0],[1,2]],"domain_max":1,"role":"phi"}"#,
        )
        .unwrap();
        assert_eq!(t.phi().unwrap().eval(0.5), 1.0);
        assert!(serde_json::from_str::<ProfileFile>(r#"{"kind":"gaussian"}"#).is_err());
    }
}
