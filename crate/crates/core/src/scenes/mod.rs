//! Procedural darkening / light-switch sequences with exact ground truth,
//! and the JSON manifest format used for every frame sequence on disk.

mod config;
mod noise;
mod render;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{
    read_ground_truth, read_image, write_ground_truth, write_image, GroundTruth, Image,
};

pub use config::{
    BackgroundConfig, ObjectConfig, ObjectShape, Rect, Scenario, SceneConfig, MIN_CONTRAST,
};
pub use noise::ValueNoise;
pub use render::{background_albedo, lighting, object_track, render_frame, ObjectTrack};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Relative paths of one frame and its labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameEntry {
    pub img: String,
    pub gt: String,
}

/// Ordered frame/label pairs, paths relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceManifest {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SceneConfig>,
    pub frames: Vec<FrameEntry>,
}

impl SequenceManifest {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// A validated manifest whose frames load on demand.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub manifest: SequenceManifest,
    root: PathBuf,
    dims: (usize, usize),
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.manifest.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn frame_path(&self, i: usize) -> PathBuf {
        self.root.join(&self.manifest.frames[i].img)
    }

    pub fn gt_path(&self, i: usize) -> PathBuf {
        self.root.join(&self.manifest.frames[i].gt)
    }

    pub fn load(&self, i: usize) -> Result<(Image, GroundTruth)> {
        let img = read_image(self.frame_path(i))?;
        let gt = read_ground_truth(self.gt_path(i))?;
        if img.dims() != self.dims || gt.dims() != self.dims {
            return Err(Error::dims(self.dims, img.dims()));
        }
        Ok((img, gt))
    }

    /// All frames, decoded in parallel, in manifest order.
    pub fn load_all(&self) -> Result<Vec<(Image, GroundTruth)>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| self.load(i))
            .collect()
    }
}

/// Reads and validates a manifest: every referenced file must exist and
/// every frame and label must share one size.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Sequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: SequenceManifest = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported manifest version {}",
            path.display(),
            manifest.version
        )));
    }
    if manifest.frames.is_empty() {
        return Err(Error::Format(format!(
            "{}: manifest lists no frames",
            path.display()
        )));
    }
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let dims_of = |rel: &str| -> Result<(usize, usize)> {
        let p = root.join(rel);
        if !p.is_file() {
            return Err(Error::io(
                &p,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "file listed in manifest not found",
                ),
            ));
        }
        let (w, h) = image::image_dimensions(&p).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(&p, io),
            other => Error::Format(format!("{}: {other}", p.display())),
        })?;
        Ok((w as usize, h as usize))
    };
    let mut dims = None;
    for entry in &manifest.frames {
        for rel in [&entry.img, &entry.gt] {
            let d = dims_of(rel)?;
            match dims {
                None => dims = Some(d),
                Some(expected) if expected != d => return Err(Error::dims(expected, d)),
                Some(_) => {}
            }
        }
    }
    Ok(Sequence {
        manifest,
        root,
        dims: dims.expect("non-empty manifest"),
    })
}

pub fn frame_name(i: usize) -> String {
    format!("frames/frame_{i:05}.png")
}

pub fn gt_name(i: usize) -> String {
    format!("gt/gt_{i:05}.png")
}

/// Renders every frame of `cfg` into `out_dir` and writes `manifest.json`.
pub fn generate(cfg: &SceneConfig, out_dir: impl AsRef<Path>) -> Result<SequenceManifest> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    for sub in ["frames", "gt"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let albedo = background_albedo(cfg);
    let track = object_track(cfg);
    let frames: Vec<FrameEntry> = (0..cfg.n_frames)
        .into_par_iter()
        .map(|t| {
            let (img, gt) = render_frame(cfg, &albedo, &track, t);
            let entry = FrameEntry {
                img: frame_name(t),
                gt: gt_name(t),
            };
            write_image(&img, out_dir.join(&entry.img))?;
            write_ground_truth(&gt, out_dir.join(&entry.gt))?;
            Ok(entry)
        })
        .collect::<Result<_>>()?;
    let manifest = SequenceManifest {
        version: MANIFEST_VERSION,
        config: Some(cfg.clone()),
        frames,
    };
    manifest.write(out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Renders a sequence in memory.
pub fn render_sequence(cfg: &SceneConfig) -> Result<Vec<(Image, GroundTruth)>> {
    cfg.validate()?;
    let albedo = background_albedo(cfg);
    let track = object_track(cfg);
    Ok((0..cfg.n_frames)
        .into_par_iter()
        .map(|t| render_frame(cfg, &albedo, &track, t))
        .collect())
}
