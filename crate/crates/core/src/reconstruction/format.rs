use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DetectionResult;
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Polygon, RasterGrid};

/// Magic bytes opening a text-line map file.
pub const TLM_MAGIC: &[u8; 4] = b"TLM1";

/// Writes `TLM1`, then width and height as little-endian `u32`, then the
/// values as little-endian `f32`, row-major from the top row.
pub fn write_tlm(grid: &RasterGrid, mut out: impl Write) -> Result<()> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")));
    let mut buf = Vec::with_capacity(12 + 4 * grid.values().len());
    buf.extend_from_slice(TLM_MAGIC);
    buf.extend_from_slice(&dim(grid.width())?.to_le_bytes());
    buf.extend_from_slice(&dim(grid.height())?.to_le_bytes());
    for &v in grid.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_tlm(mut input: impl Read) -> Result<RasterGrid> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[..4] != TLM_MAGIC {
        return Err(Error::Format("missing TLM1 header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let (width, height) = (word(4) as usize, word(8) as usize);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| Error::Format("map dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{width}x{height} map needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let values = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    RasterGrid::new(width, height, values)
}

impl RasterGrid {
    pub fn read_tlm(path: impl AsRef<Path>) -> Result<Self> {
        read_tlm(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn write_tlm(&self, path: impl AsRef<Path>) -> Result<()> {
        write_tlm(self, std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// One detection as stored in a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub polygon: Vec<Point2D>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    pub char_count: usize,
}

impl ResultEntry {
    pub fn polygon(&self) -> Result<Polygon> {
        Polygon::new(self.polygon.clone())
    }
}

impl From<&DetectionResult> for ResultEntry {
    fn from(d: &DetectionResult) -> Self {
        Self {
            polygon: d.boundary.vertices().to_vec(),
            transcript: d.transcript.clone(),
            char_count: d.char_count,
        }
    }
}

/// Per-image detection results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub image_id: String,
    pub detections: Vec<ResultEntry>,
}

impl ResultsFile {
    pub fn new(image_id: impl Into<String>, detections: &[DetectionResult]) -> Self {
        Self {
            image_id: image_id.into(),
            detections: detections.iter().map(ResultEntry::from).collect(),
        }
    }

    pub fn polygons(&self) -> Result<Vec<Polygon>> {
        self.detections.iter().map(ResultEntry::polygon).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
