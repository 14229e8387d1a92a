//! PGM image I/O.
//!
//! Scalar grids (height fields, scalar textures) are written as ASCII 16-bit
//! graymaps (`P2`, maxval 65535) with a `key=value` sidecar holding the
//! value range needed to undo the quantization. Masks are binary 8-bit
//! graymaps (`P5`): 0 untagged, 255 tagged. Image row `j` is grid row `j`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use thiserror::Error;

use crate::brushing::Mask;
use crate::surfacegen::{HeightField, ScalarTexture, CONTOUR_BANDS};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error("bad sidecar: {0}")]
    Sidecar(String),
    #[error("{0}")]
    Invalid(String),
}

const MAX16: f64 = 65535.0;

/// Sidecar path for a grid image: `name.pgm` → `name.pgm.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Metadata stored next to a 16-bit grid image.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeta {
    pub value_min: f64,
    pub value_max: f64,
    pub cell_size: Option<f64>,
    pub contour_levels: Option<[f64; CONTOUR_BANDS]>,
}

impl GridMeta {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "value_min={:?}", self.value_min);
        let _ = writeln!(out, "value_max={:?}", self.value_max);
        if let Some(c) = self.cell_size {
            let _ = writeln!(out, "cell_size={c:?}");
        }
        if let Some(levels) = self.contour_levels {
            let list: Vec<String> = levels.iter().map(|l| format!("{l:?}")).collect();
            let _ = writeln!(out, "contour_levels={}", list.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PgmError> {
        let mut kv = BTreeMap::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PgmError::Sidecar(format!("no '=' in {line:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| PgmError::Sidecar(format!("not a number: {s:?}")))
        };
        let get = |k: &str| {
            kv.get(k)
                .ok_or_else(|| PgmError::Sidecar(format!("missing {k}")))
        };
        let contour_levels = match kv.get("contour_levels") {
            Some(v) => {
                let vals = v
                    .split(',')
                    .map(|x| num(x.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(
                    vals.try_into()
                        .map_err(|_| PgmError::Sidecar("expected 7 contour levels".into()))?,
                )
            }
            None => None,
        };
        Ok(Self {
            value_min: num(get("value_min")?)?,
            value_max: num(get("value_max")?)?,
            cell_size: kv.get("cell_size").map(|v| num(v)).transpose()?,
            contour_levels,
        })
    }
}

/// Encodes a grid as ASCII 16-bit PGM, mapping `[min, max]` onto `[0, 65535]`.
pub fn encode_grid(
    width: usize,
    height: usize,
    values: &[f64],
    min: f64,
    max: f64,
) -> Result<Vec<u8>, PgmError> {
    let span = max - min;
    let samples: Vec<u16> = values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - min) / span * MAX16).round().clamp(0.0, MAX16) as u16
            } else {
                0
            }
        })
        .collect();
    // The image crate's PNM encoder has no 16-bit graymap support, so P2 is
    // written directly; decoding goes through the image crate.
    let mut out = format!("P2\n{width} {height}\n65535\n");
    for row in samples.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(u16::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out.into_bytes())
}

/// Decodes a PGM into raw samples and their maxval-normalised values in `[0, 1]`.
pub fn decode_grid(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), PgmError> {
    let img = image::load(Cursor::new(bytes), ImageFormat::Pnm)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = match img {
        DynamicImage::ImageLuma16(g) => {
            g.into_raw().into_iter().map(|s| s as f64 / MAX16).collect()
        }
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|s| s as f64 / 255.0).collect(),
        other => {
            return Err(PgmError::Invalid(format!(
                "not a graymap: {:?}",
                other.color()
            )))
        }
    };
    Ok((w, h, values))
}

fn write_grid(
    path: &Path,
    width: usize,
    height: usize,
    values: &[f64],
    meta: &GridMeta,
) -> Result<(), PgmError> {
    fs::write(
        path,
        encode_grid(width, height, values, meta.value_min, meta.value_max)?,
    )?;
    fs::write(sidecar_path(path), meta.to_text())?;
    Ok(())
}

fn read_grid(path: &Path) -> Result<(usize, usize, Vec<f64>, GridMeta), PgmError> {
    let (w, h, unit) = decode_grid(&fs::read(path)?)?;
    let meta = GridMeta::parse(&fs::read_to_string(sidecar_path(path))?)?;
    let span = meta.value_max - meta.value_min;
    let values = unit
        .into_iter()
        .map(|u| meta.value_min + u * span)
        .collect();
    Ok((w, h, values, meta))
}

/// Writes a height field; elevations round-trip within `(max − min) / 131070`.
pub fn write_heightfield(path: &Path, hf: &HeightField) -> Result<(), PgmError> {
    let (lo, hi) = hf.min_max();
    let meta = GridMeta {
        value_min: lo,
        value_max: hi,
        cell_size: Some(hf.cell_size),
        contour_levels: None,
    };
    write_grid(path, hf.width, hf.height, &hf.elevations, &meta)
}

pub fn read_heightfield(path: &Path) -> Result<HeightField, PgmError> {
    let (w, h, values, meta) = read_grid(path)?;
    HeightField::new(w, h, meta.cell_size.unwrap_or(1.0), values)
        .map_err(|e| PgmError::Invalid(e.to_string()))
}

pub fn write_scalar_texture(path: &Path, tex: &ScalarTexture) -> Result<(), PgmError> {
    let lo = tex.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tex.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let meta = GridMeta {
        value_min: lo,
        value_max: hi,
        cell_size: None,
        contour_levels: Some(tex.contour_levels),
    };
    write_grid(path, tex.width, tex.height, &tex.values, &meta)
}

pub fn read_scalar_texture(path: &Path) -> Result<ScalarTexture, PgmError> {
    let (width, height, values, meta) = read_grid(path)?;
    let contour_levels = meta
        .contour_levels
        .ok_or_else(|| PgmError::Sidecar("missing contour_levels".into()))?;
    Ok(ScalarTexture {
        width,
        height,
        values,
        contour_levels,
    })
}

/// Binary `P5` encoding of a mask.
pub fn encode_mask(mask: &Mask) -> Result<Vec<u8>, PgmError> {
    let bytes: Vec<u8> = mask.tags.iter().map(|&t| if t { 255 } else { 0 }).collect();
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            &bytes,
            mask.width as u32,
            mask.height as u32,
            ExtendedColorType::L8,
        )?;
    Ok(out)
}

/// Decodes a graymap as a mask; samples at or above half of maxval are tagged.
pub fn decode_mask(bytes: &[u8]) -> Result<Mask, PgmError> {
    let (width, height, unit) = decode_grid(bytes)?;
    Ok(Mask {
        width,
        height,
        tags: unit.into_iter().map(|u| u >= 0.5).collect(),
    })
}

pub fn write_mask(path: &Path, mask: &Mask) -> Result<(), PgmError> {
    Ok(fs::write(path, encode_mask(mask)?)?)
}

pub fn read_mask(path: &Path) -> Result<Mask, PgmError> {
    decode_mask(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let mut m = Mask::new(5, 3);
        m.set(0, 0, true);
        m.set(4, 2, true);
        m.set(2, 1, true);
        let bytes = encode_mask(&m).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(decode_mask(&bytes).unwrap(), m);
    }

    #[test]
    fn grid_is_ascii_sixteen_bit() {
        let bytes = encode_grid(3, 1, &[0.0, 0.5, 1.0], 0.0, 1.0).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("P2"));
        assert!(text.contains("65535"));
        let (w, h, v) = decode_grid(&bytes).unwrap();
        assert_eq!((w, h), (3, 1));
        assert_eq!(v[0], 0.0);
        assert_eq!(v[2], 1.0);
        assert!((v[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn sidecar_round_trip() {
        let meta = GridMeta {
            value_min: -0.25,
            value_max: 3.5,
            cell_size: Some(0.001),
            contour_levels: Some([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]),
        };
        assert_eq!(GridMeta::parse(&meta.to_text()).unwrap(), meta);
        assert!(GridMeta::parse("value_min=0\n").is_err());
    }

    #[test]
    fn heightfield_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hf.pgm");
        let hf = HeightField::new(4, 2, 0.5, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0]).unwrap();
        write_heightfield(&path, &hf).unwrap();
        let back = read_heightfield(&path).unwrap();
        assert_eq!((back.width, back.height, back.cell_size), (4, 2, 0.5));
        for (a, b) in back.elevations.iter().zip(&hf.elevations) {
            assert!((a - b).abs() <= 1.0 / 131070.0 + 1e-15);
        }
    }
}
