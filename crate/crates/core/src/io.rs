//! File formats: cloud and source JSON, point lists and field tables as CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{AmbientDomain, Inclusion, InclusionCloud, Omega, ShapeKind};
use crate::kernels::SourceTerm;
use crate::{Error, Result, Vec3};

/// Serde adapter storing a [`Vec3`] as `[x, y, z]`.
pub mod vec3 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Vec3;

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec3, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3::new(x, y, z))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InclusionRecord {
    #[serde(with = "vec3")]
    center: Vec3,
    radius: f64,
    #[serde(default, skip_serializing_if = "is_ball")]
    shape: ShapeKind,
}

fn is_ball(shape: &ShapeKind) -> bool {
    *shape == ShapeKind::Ball
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OmegaRecord {
    #[serde(with = "vec3")]
    center: Vec3,
    diameter: f64,
}

/// On-disk cloud description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CloudFile {
    #[serde(default)]
    pub ambient: AmbientDomain,
    inclusions: Vec<InclusionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<OmegaRecord>,
}

impl CloudFile {
    pub fn new(cloud: &InclusionCloud, ambient: AmbientDomain) -> Self {
        Self {
            ambient,
            inclusions: cloud
                .inclusions
                .iter()
                .map(|inc| InclusionRecord {
                    center: inc.center,
                    radius: inc.radius,
                    shape: inc.shape,
                })
                .collect(),
            omega: Some(OmegaRecord {
                center: cloud.omega.center,
                diameter: cloud.omega.diameter,
            }),
        }
    }

    pub fn cloud(&self) -> Result<InclusionCloud> {
        let inclusions = self
            .inclusions
            .iter()
            .map(|r| {
                let mut inc = Inclusion::ball(r.center, r.radius)?;
                inc.shape = r.shape;
                Ok(inc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(match &self.omega {
            Some(o) => InclusionCloud::with_omega(
                inclusions,
                Omega {
                    center: o.center,
                    diameter: o.diameter,
                },
            ),
            None => InclusionCloud::new(inclusions),
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_cloud(path: &Path) -> Result<(InclusionCloud, AmbientDomain)> {
    let file: CloudFile = read_json(path)?;
    Ok((file.cloud()?, file.ambient))
}

pub fn write_cloud(path: &Path, cloud: &InclusionCloud, ambient: AmbientDomain) -> Result<()> {
    write_json(path, &CloudFile::new(cloud, ambient))
}

pub fn read_source(path: &Path) -> Result<SourceTerm> {
    let source: SourceTerm = read_json(path)?;
    source.validate()?;
    Ok(source)
}

/// Parses `"x,y,z"`.
pub fn parse_point(text: &str) -> Result<Vec3> {
    let parts = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidInput(format!("bad point {text:?}: {e}")))?;
    match parts.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Error::InvalidInput(format!(
            "point {text:?} must have three comma-separated coordinates"
        ))),
    }
}

/// Reads a CSV of points; a header row (any non-numeric first row) is skipped.
pub fn read_points(path: &Path) -> Result<Vec<Vec3>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let values: std::result::Result<Vec<f64>, _> =
            record.iter().take(3).map(str::parse::<f64>).collect();
        match values {
            Ok(v) if v.len() == 3 => out.push(Vec3::new(v[0], v[1], v[2])),
            _ if row == 0 => continue,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "row {} of {} is not a point",
                    row + 1,
                    path.display()
                )))
            }
        }
    }
    Ok(out)
}

/// One evaluated field value.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub point: Vec3,
    pub value: f64,
    pub flags: String,
}

/// Writes `x,y,z,value,flags`.
pub fn write_field_csv(path: &Path, rows: &[FieldRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "z", "value", "flags"])?;
    for row in rows {
        w.write_record([
            row.point.x.to_string(),
            row.point.y.to_string(),
            row.point.z.to_string(),
            row.value.to_string(),
            row.flags.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a dense matrix as headerless CSV, one row per line.
pub fn write_matrix_csv(path: &Path, m: &nalgebra::DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
