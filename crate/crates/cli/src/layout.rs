use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// One image listed in `images/manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub id: String,
    pub width: u32,
    pub height: u32,
    /// File name under `images/`; when absent, `<id>.<ext>` is looked up.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

const IMAGE_EXTENSIONS: [&str; 7] = ["png", "jpg", "jpeg", "bmp", "gif", "webp", "tif"];

/// Directory layout of an annotation project.
///
/// ```text
/// root/
///   images/manifest.json   images/<file>
///   annotations/[<annotator>/]<id>.json
///   annotations-perturbed/[<annotator>/]<id>.json
///   detections/<id>.json   maps/<id>.tlm   gts/<id>.json
///   pseudo/<id>.json       results/<id>.json   report.json
/// ```
#[derive(Debug, Clone)]
pub struct ProjectLayout {
    root: PathBuf,
    annotator: Option<String>,
}

pub fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if !ok {
        bail!("{id:?} is not a usable identifier (letters, digits, '_', '-', '.')");
    }
    Ok(())
}

impl ProjectLayout {
    pub fn new(root: impl Into<PathBuf>, annotator: Option<String>) -> Result<Self> {
        if let Some(name) = &annotator {
            check_id(name).context("annotator name")?;
        }
        Ok(Self {
            root: root.into(),
            annotator,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn annotator(&self) -> Option<&str> {
        self.annotator.as_deref()
    }

    fn per_annotator(&self, dir: &str) -> PathBuf {
        let base = self.root.join(dir);
        match &self.annotator {
            Some(name) => base.join(name),
            None => base,
        }
    }

    pub fn images_dir(&self) -> PathBuf {
        self.root.join("images")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.images_dir().join("manifest.json")
    }

    pub fn annotations_dir(&self) -> PathBuf {
        self.per_annotator("annotations")
    }

    pub fn perturbed_dir(&self) -> PathBuf {
        self.per_annotator("annotations-perturbed")
    }

    pub fn detections_dir(&self) -> PathBuf {
        self.root.join("detections")
    }

    pub fn maps_dir(&self) -> PathBuf {
        self.root.join("maps")
    }

    pub fn gts_dir(&self) -> PathBuf {
        self.root.join("gts")
    }

    pub fn pseudo_dir(&self) -> PathBuf {
        self.root.join("pseudo")
    }

    pub fn results_dir(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn annotation_path(&self, id: &str) -> PathBuf {
        self.annotations_dir().join(format!("{id}.json"))
    }

    /// Sidecar holding the service's write counter for an annotation.
    pub fn version_path(&self, id: &str) -> PathBuf {
        self.annotations_dir().join(format!("{id}.version"))
    }

    pub fn map_path(&self, id: &str) -> PathBuf {
        self.maps_dir().join(format!("{id}.tlm"))
    }

    pub fn read_manifest(&self) -> Result<Vec<ImageEntry>> {
        let path = self.manifest_path();
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let entries: Vec<ImageEntry> =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for e in &entries {
            check_id(&e.id).with_context(|| format!("image id in {}", path.display()))?;
        }
        Ok(entries)
    }

    pub fn write_manifest(&self, entries: &[ImageEntry]) -> Result<()> {
        std::fs::create_dir_all(self.images_dir())?;
        std::fs::write(self.manifest_path(), serde_json::to_string_pretty(entries)?)?;
        Ok(())
    }

    /// Resolves the image file of `entry`, if one exists on disk.
    pub fn image_file(&self, entry: &ImageEntry) -> Option<PathBuf> {
        let dir = self.images_dir();
        match &entry.file {
            Some(name) => {
                let path = dir.join(name);
                (Path::new(name).components().count() == 1 && path.is_file()).then_some(path)
            }
            None => IMAGE_EXTENSIONS
                .iter()
                .map(|ext| dir.join(format!("{}.{ext}", entry.id)))
                .find(|p| p.is_file()),
        }
    }
}

/// Sorted stems of the `*.json` files in `dir`; a missing directory is empty.
pub fn json_stems(dir: &Path) -> Result<Vec<String>> {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e).with_context(|| format!("listing {}", dir.display())),
    };
    let mut stems = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    Ok(stems)
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().context("path has no parent directory")?;
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
