//! Seeded test-function corpora.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rearr_core::isoperimetry::{ball_cells, indicator_mollify};
use rearr_core::{GridFunction, GridGeometry};
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write, CliError, Result};
use crate::formats::{read_grid, write_grid};

/// Features narrower than this many cells are rejected.
const MIN_FEATURE_CELLS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Lattice points per axis, with `side`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    /// Explicit per-axis counts, with `spacing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extents: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

impl GridSpec {
    pub fn cube(points: usize, side: f64) -> Self {
        Self {
            points: Some(points),
            side: Some(side),
            extents: None,
            spacing: None,
        }
    }

    pub fn geometry(&self, dim: usize) -> Result<GridGeometry> {
        let g = match (self, dim) {
            (
                GridSpec {
                    points: Some(p),
                    side: Some(s),
                    extents: None,
                    spacing: None,
                },
                _,
            ) => GridGeometry::cube(dim, *p, *s)?,
            (
                GridSpec {
                    points: None,
                    side: None,
                    extents: Some(e),
                    spacing: Some(h),
                },
                _,
            ) => {
                if e.len() != dim {
                    return Err(CliError::Config(format!(
                        "grid has {} extents but dim = {dim}",
                        e.len()
                    )));
                }
                GridGeometry::new(*h, e.clone())?
            }
            _ => {
                return Err(CliError::Config(
                    "grid needs either points + side or extents + spacing".into(),
                ))
            }
        };
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `(1 − |x − c|/r)₊` with the apex on a lattice node; the first one is
    /// centred with radius `radius`.
    Cone {
        count: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Product of one-dimensional `(1 − s²)₊²` bumps.
    TensorBump { count: usize },
    /// Linear-collar mollified indicators of one centred ball, one per `ε`.
    MollifiedDisk {
        epsilons: Vec<f64>,
        #[serde(default = "disk_radius")]
        radius: f64,
    },
    /// Rectified, windowed noise after iterated box averaging.
    SmoothedNoise {
        count: usize,
        /// Box half-width in cells.
        radius: usize,
        #[serde(default = "three")]
        passes: usize,
    },
    /// Sum of `bumps` radial `(1 − |x−c|²/w²)₊²` bumps.
    MultiBump { count: usize, bumps: usize },
}

fn one() -> f64 {
    1.0
}

fn disk_radius() -> f64 {
    0.6
}

fn three() -> usize {
    3
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cone { .. } => "cone",
            Family::TensorBump { .. } => "tensor_bump",
            Family::MollifiedDisk { .. } => "mollified_disk",
            Family::SmoothedNoise { .. } => "smoothed_noise",
            Family::MultiBump { .. } => "multi_bump",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub dim: usize,
    pub grid: GridSpec,
    #[serde(rename = "family", default)]
    pub families: Vec<Family>,
}

impl Default for CorpusSpec {
    /// 256² points on `[0, 2.5]²`, a few functions from every family.
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            dim: 2,
            grid: GridSpec::cube(256, 2.5),
            families: vec![
                Family::Cone {
                    count: 3,
                    radius: 1.0,
                },
                Family::TensorBump { count: 3 },
                Family::MollifiedDisk {
                    epsilons: vec![0.2, 0.1, 0.05],
                    radius: disk_radius(),
                },
                Family::SmoothedNoise {
                    count: 2,
                    radius: 6,
                    passes: 3,
                },
                Family::MultiBump { count: 3, bumps: 3 },
            ],
        }
    }
}

impl CorpusSpec {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::parse(origin, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("corpus specs serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub function: GridFunction,
}

fn too_small(what: &str) -> CliError {
    CliError::Config(format!("grid too small for {what}"))
}

/// Geometry helpers shared by the families.
struct Frame {
    geometry: GridGeometry,
    h: f64,
    /// Half-side per axis.
    half: Vec<f64>,
}

impl Frame {
    fn new(geometry: GridGeometry) -> Self {
        let h = geometry.spacing();
        let half = geometry.sides().iter().map(|s| 0.5 * s).collect();
        Self { geometry, h, half }
    }

    fn min_half(&self) -> f64 {
        self.half.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Room left around a ball of radius `r` centred in the cube, keeping two
    /// cells clear of the outer layer.
    fn slack(&self, r: f64) -> f64 {
        self.min_half() - r - 2.0 * self.h
    }

    fn check_width(&self, width: f64, what: &str) -> Result<()> {
        if width < MIN_FEATURE_CELLS * self.h {
            return Err(too_small(what));
        }
        Ok(())
    }

    /// Centre displaced by at most `slack` per axis.
    fn random_centre(&self, rng: &mut ChaCha8Rng, slack: f64) -> Vec<f64> {
        self.half
            .iter()
            .map(|c| c + slack * rng.random_range(-1.0..1.0))
            .collect()
    }

    /// Nearest lattice node.
    fn snap(&self, c: Vec<f64>) -> Vec<f64> {
        c.into_iter()
            .map(|x| (x / self.h).round() * self.h)
            .collect()
    }

    fn sample(&self, g: impl FnMut(&[f64]) -> f64) -> Result<GridFunction> {
        Ok(GridFunction::from_fn_clamped(self.geometry.clone(), g)?)
    }
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn bump2(s: f64) -> f64 {
    let u = (1.0 - s * s).max(0.0);
    u * u
}

fn record(id: String, family: &str, params: &[(&str, f64)], function: GridFunction) -> CorpusItem {
    CorpusItem {
        id,
        family: family.into(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        function,
    }
}

fn cones(
    frame: &Frame,
    rng: &mut ChaCha8Rng,
    count: usize,
    radius: f64,
) -> Result<Vec<CorpusItem>> {
    frame.check_width(radius * 0.5, "cone")?;
    if frame.slack(radius) < 0.0 {
        return Err(too_small("cone radius"));
    }
    (0..count)
        .map(|i| {
            let (r, c) = if i == 0 {
                (radius, frame.snap(frame.half.clone()))
            } else {
                let r = radius * rng.random_range(0.5..1.0);
                // apex on a node, so the sampled maximum is the true one
                let c = frame.random_centre(rng, frame.slack(r) - frame.h);
                (r, frame.snap(c))
            };
            let f = frame.sample(|x| (1.0 - dist(x, &c) / r).max(0.0))?;
            Ok(record(format!("cone_{i}"), "cone", &[("radius", r)], f))
        })
        .collect()
}

fn tensor_bumps(frame: &Frame, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<CorpusItem>> {
    frame.check_width(0.25 * frame.min_half(), "tensor bump")?;
    (0..count)
        .map(|i| {
            let widths: Vec<f64> = frame
                .half
                .iter()
                .map(|h| h * rng.random_range(0.25..0.8))
                .collect();
            let centre: Vec<f64> = frame
                .half
                .iter()
                .zip(&widths)
                .map(|(c, w)| c + (c - w - 2.0 * frame.h) * rng.random_range(-0.5..0.5))
                .collect();
            let f = frame.sample(|x| {
                x.iter()
                    .zip(&centre)
                    .zip(&widths)
                    .map(|((x, c), w)| bump2((x - c) / w))
                    .product()
            })?;
            Ok(record(format!("tensor_bump_{i}"), "tensor_bump", &[], f))
        })
        .collect()
}

fn mollified_disks(frame: &Frame, epsilons: &[f64], radius: f64) -> Result<Vec<CorpusItem>> {
    frame.check_width(radius, "disk")?;
    let cells = ball_cells(&frame.geometry, &frame.half, radius);
    epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            if frame.slack(radius + eps) < 0.0 {
                return Err(too_small("disk collar"));
            }
            let f = indicator_mollify(&frame.geometry, &cells, eps)?;
            Ok(record(
                format!("mollified_disk_{i}"),
                "mollified_disk",
                &[("epsilon", eps), ("radius", radius)],
                f,
            ))
        })
        .collect()
}

/// Zero-padded moving average of half-width `r` along every axis.
fn box_average(geometry: &GridGeometry, values: &mut [f64], r: usize) {
    let extents = geometry.extents();
    let strides = geometry.strides();
    let width = (2 * r + 1) as f64;
    let mut line = Vec::new();
    let mut prefix = Vec::new();
    for (&e, &stride) in extents.iter().zip(&strides) {
        let others: usize = values.len() / e;
        for k in 0..others {
            // k enumerates the lines along `axis` in row-major order
            let base = {
                let outer = k / stride;
                let inner = k % stride;
                outer * stride * e + inner
            };
            line.clear();
            line.extend((0..e).map(|j| values[base + j * stride]));
            prefix.clear();
            prefix.push(0.0);
            let mut acc = 0.0;
            for v in &line {
                acc += v;
                prefix.push(acc);
            }
            for j in 0..e {
                let lo = j.saturating_sub(r);
                let hi = (j + r + 1).min(e);
                values[base + j * stride] = (prefix[hi] - prefix[lo]) / width;
            }
        }
    }
}

fn smoothed_noise(
    frame: &Frame,
    rng: &mut ChaCha8Rng,
    count: usize,
    radius: usize,
    passes: usize,
) -> Result<Vec<CorpusItem>> {
    let smallest = *frame
        .geometry
        .extents()
        .iter()
        .min()
        .expect("grids have axes");
    if radius == 0 || 2 * radius + 1 + 4 > smallest {
        return Err(too_small("smoothing radius"));
    }
    let geometry = &frame.geometry;
    (0..count)
        .map(|i| {
            let mut v: Vec<f64> = (0..geometry.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            for _ in 0..passes {
                box_average(geometry, &mut v, radius);
            }
            // rectify, then taper to zero well inside the outer layer
            let taper = |x: &[f64]| -> f64 {
                x.iter()
                    .zip(&frame.half)
                    .map(|(x, c)| bump2((x - c) / (c - 2.0 * frame.h)))
                    .product()
            };
            for (k, val) in v.iter_mut().enumerate() {
                *val = val.max(0.0) * taper(&geometry.coords(k));
            }
            let top = v.iter().copied().fold(0.0, f64::max);
            if top > 0.0 {
                v.iter_mut().for_each(|x| *x /= top);
            }
            for (k, x) in v.iter_mut().enumerate() {
                if geometry.is_boundary(k) {
                    *x = 0.0;
                }
            }
            let f = GridFunction::new(geometry.clone(), v)?;
            Ok(record(
                format!("smoothed_noise_{i}"),
                "smoothed_noise",
                &[("radius", radius as f64), ("passes", passes as f64)],
                f,
            ))
        })
        .collect()
}

fn multi_bumps(
    frame: &Frame,
    rng: &mut ChaCha8Rng,
    count: usize,
    bumps: usize,
) -> Result<Vec<CorpusItem>> {
    if bumps == 0 {
        return Err(CliError::Config(
            "multi_bump needs at least one bump".into(),
        ));
    }
    let m = frame.min_half();
    frame.check_width(0.2 * m, "multi bump")?;
    (0..count)
        .map(|i| {
            let parts: Vec<(Vec<f64>, f64, f64)> = (0..bumps)
                .map(|_| {
                    let w = m * rng.random_range(0.2..0.5);
                    let a = rng.random_range(0.5..1.5);
                    (frame.random_centre(rng, frame.slack(w)), w, a)
                })
                .collect();
            let f = frame.sample(|x| {
                parts
                    .iter()
                    .map(|(c, w, a)| a * bump2(dist(x, c) / w))
                    .sum()
            })?;
            Ok(record(
                format!("multi_bump_{i}"),
                "multi_bump",
                &[("bumps", bumps as f64)],
                f,
            ))
        })
        .collect()
}

/// Every family draws from its own ChaCha stream, so adding a family never
/// changes the functions of the others.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusItem>> {
    if spec.dim == 0 {
        return Err(CliError::Config("dim must be at least 1".into()));
    }
    let frame = Frame::new(spec.grid.geometry(spec.dim)?);
    let mut out = Vec::new();
    for (k, family) in spec.families.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        let items = match family {
            Family::Cone { count, radius } => cones(&frame, &mut rng, *count, *radius)?,
            Family::TensorBump { count } => tensor_bumps(&frame, &mut rng, *count)?,
            Family::MollifiedDisk { epsilons, radius } => {
                mollified_disks(&frame, epsilons, *radius)?
            }
            Family::SmoothedNoise {
                count,
                radius,
                passes,
            } => smoothed_noise(&frame, &mut rng, *count, *radius, *passes)?,
            Family::MultiBump { count, bumps } => multi_bumps(&frame, &mut rng, *count, *bumps)?,
        };
        // ids stay unique when a family kind repeats
        let repeat = spec.families[..k]
            .iter()
            .filter(|f| f.name() == family.name())
            .count();
        out.extend(items.into_iter().map(|mut it| {
            if repeat > 0 {
                it.id = format!("{}_{repeat}", it.id);
            }
            it
        }));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: CorpusSpec,
    pub functions: Vec<ManifestEntry>,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes one JSON file per function plus `manifest.json`.
pub fn write_corpus(dir: &Path, spec: &CorpusSpec, items: &[CorpusItem]) -> Result<()> {
    let mut functions = Vec::with_capacity(items.len());
    for it in items {
        let file = format!("{}.json", it.id);
        write_grid(&dir.join(&file), &it.function)?;
        functions.push(ManifestEntry {
            id: it.id.clone(),
            family: it.family.clone(),
            params: it.params.clone(),
            file,
        });
    }
    let manifest = Manifest {
        spec: spec.clone(),
        functions,
    };
    write(
        &dir.join(MANIFEST),
        serde_json::to_string_pretty(&manifest).expect("manifests serialize"),
    )
}

/// A corpus entry that may have failed to load.
pub type LoadedItem = std::result::Result<CorpusItem, (String, CliError)>;

/// Reads a directory written by [`write_corpus`]. A malformed function file
/// yields an `Err` entry instead of aborting.
pub fn read_corpus(dir: &Path) -> Result<(Manifest, Vec<LoadedItem>)> {
    let path = dir.join(MANIFEST);
    let manifest: Manifest =
        serde_json::from_str(&read_to_string(&path)?).map_err(|e| CliError::parse(&path, e))?;
    let items = manifest
        .functions
        .iter()
        .map(|e| {
            read_grid(&dir.join(&e.file))
                .map(|function| CorpusItem {
                    id: e.id.clone(),
                    family: e.family.clone(),
                    params: e.params.clone(),
                    function,
                })
                .map_err(|err| (e.id.clone(), err))
        })
        .collect();
    Ok((manifest, items))
}
