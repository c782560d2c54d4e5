//! Single-file NIfTI-1 label volumes (`.nii`, `.nii.gz`).
//!
//! Only the fields needed for label maps are decoded: grid size, voxel
//! spacing, datatype, payload offset and the intensity scaling (which is
//! ignored for labels). Orientation is not used.

use std::fs;
use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::volume::{Dims, LabelVolume, Spacing};

pub const HEADER_SIZE: usize = 348;
const NIFTI2_HEADER_SIZE: i32 = 540;

pub const DT_UINT8: i16 = 2;
pub const DT_INT16: i16 = 4;
pub const DT_INT32: i16 = 8;
pub const DT_FLOAT32: i16 = 16;

/// Largest distance from an integer accepted for float labels.
const FLOAT_LABEL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum NiftiError {
    #[error("file is shorter than a NIfTI-1 header ({0} bytes)")]
    TooShort(usize),
    #[error("NIfTI-2 files are not supported")]
    Nifti2,
    #[error("header size field is {0}, expected 348")]
    BadHeaderSize(i32),
    #[error("bad magic {0:?}, expected \"n+1\"")]
    BadMagic([u8; 4]),
    #[error("header/image file pairs (\"ni1\") are not supported; use a single .nii file")]
    HeaderPair,
    #[error("unsupported dimensions {0:?}")]
    BadDims([i16; 8]),
    #[error("unsupported datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("voxel offset {0} lies inside the header")]
    BadOffset(f32),
    #[error("payload truncated: need {expected} bytes, file has {got}")]
    Truncated { expected: usize, got: usize },
    #[error("negative label {value} at voxel {index}")]
    NegativeLabel { index: usize, value: f64 },
    #[error("non-integral label {value} at voxel {index}")]
    NonIntegralLabel { index: usize, value: f64 },
    #[error("gzip stream is corrupt: {0}")]
    Gzip(std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub sizeof_hdr: i32,
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub magic: [u8; 4],
    pub endianness: Endianness,
}

impl NiftiHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self, NiftiError> {
        if bytes.len() < HEADER_SIZE {
            return Err(NiftiError::TooShort(bytes.len()));
        }
        if LittleEndian::read_i32(bytes) == NIFTI2_HEADER_SIZE
            || BigEndian::read_i32(bytes) == NIFTI2_HEADER_SIZE
        {
            return Err(NiftiError::Nifti2);
        }
        let dim0_le = LittleEndian::read_i16(&bytes[40..]);
        if (1..=7).contains(&dim0_le) {
            Self::parse_with::<LittleEndian>(bytes, Endianness::Little)
        } else {
            Self::parse_with::<BigEndian>(bytes, Endianness::Big)
        }
    }

    fn parse_with<B: ByteOrder>(bytes: &[u8], endianness: Endianness) -> Result<Self, NiftiError> {
        let sizeof_hdr = B::read_i32(&bytes[0..]);
        if sizeof_hdr != HEADER_SIZE as i32 {
            return Err(NiftiError::BadHeaderSize(sizeof_hdr));
        }
        let mut dim = [0i16; 8];
        for (k, d) in dim.iter_mut().enumerate() {
            *d = B::read_i16(&bytes[40 + 2 * k..]);
        }
        let mut pixdim = [0f32; 8];
        for (k, p) in pixdim.iter_mut().enumerate() {
            *p = B::read_f32(&bytes[76 + 4 * k..]);
        }
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&bytes[344..348]);
        Ok(NiftiHeader {
            sizeof_hdr,
            dim,
            datatype: B::read_i16(&bytes[70..]),
            bitpix: B::read_i16(&bytes[72..]),
            pixdim,
            vox_offset: B::read_f32(&bytes[108..]),
            scl_slope: B::read_f32(&bytes[112..]),
            scl_inter: B::read_f32(&bytes[116..]),
            magic,
            endianness,
        })
    }

    /// Spatial grid size. Dimensions past the third must be singleton.
    pub fn dims(&self) -> Result<Dims, NiftiError> {
        let n = self.dim[0];
        let bad = || NiftiError::BadDims(self.dim);
        if !(2..=7).contains(&n) {
            return Err(bad());
        }
        let n = n as usize;
        if self.dim[1..=n].iter().any(|&d| d < 1) || self.dim[4..=n.max(3)].iter().any(|&d| d != 1)
        {
            return Err(bad());
        }
        let z = if n >= 3 { self.dim[3] as usize } else { 1 };
        Dims::new(self.dim[1] as usize, self.dim[2] as usize, z).map_err(|_| bad())
    }

    /// Absolute pixdim values; zeros become 1 mm.
    pub fn spacing(&self) -> Spacing {
        let mut s = [1.0f64; 3];
        for (a, v) in s.iter_mut().enumerate() {
            let p = self.pixdim[a + 1].abs() as f64;
            if p > 0.0 && p.is_finite() {
                *v = p;
            } else {
                log::warn!("pixdim[{}] is {}; using 1.0 mm", a + 1, self.pixdim[a + 1]);
            }
        }
        Spacing {
            dx: s[0],
            dy: s[1],
            dz: s[2],
        }
    }

    fn bytes_per_voxel(&self) -> Result<usize, NiftiError> {
        match self.datatype {
            DT_UINT8 => Ok(1),
            DT_INT16 => Ok(2),
            DT_INT32 | DT_FLOAT32 => Ok(4),
            other => Err(NiftiError::UnsupportedDatatype(other)),
        }
    }
}

pub fn read_nifti(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_nifti(&bytes)?)
}

/// Decodes a NIfTI-1 image held in memory; gzip framing is detected from
/// the stream's magic bytes.
pub fn parse_nifti(bytes: &[u8]) -> Result<LabelVolume, NiftiError> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut raw = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut raw)
            .map_err(NiftiError::Gzip)?;
        return parse_plain(&raw);
    }
    parse_plain(bytes)
}

fn parse_plain(bytes: &[u8]) -> Result<LabelVolume, NiftiError> {
    let header = NiftiHeader::parse(bytes)?;
    match &header.magic {
        b"n+1\0" => {}
        b"ni1\0" => return Err(NiftiError::HeaderPair),
        other => return Err(NiftiError::BadMagic(*other)),
    }
    let dims = header.dims()?;
    let bpv = header.bytes_per_voxel()?;
    if !(header.vox_offset >= HEADER_SIZE as f32) {
        return Err(NiftiError::BadOffset(header.vox_offset));
    }
    let offset = header.vox_offset as usize;
    let expected = offset + dims.len() * bpv;
    if bytes.len() < expected {
        return Err(NiftiError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    if header.scl_slope != 0.0 && (header.scl_slope != 1.0 || header.scl_inter != 0.0) {
        log::warn!(
            "ignoring intensity scaling (slope {}, intercept {}) for a label volume",
            header.scl_slope,
            header.scl_inter
        );
    }

    let payload = &bytes[offset..expected];
    let labels = match header.endianness {
        Endianness::Little => decode::<LittleEndian>(payload, header.datatype, dims.len())?,
        Endianness::Big => decode::<BigEndian>(payload, header.datatype, dims.len())?,
    };
    Ok(LabelVolume::new(dims, labels, header.spacing()).expect("payload length checked"))
}

fn decode<B: ByteOrder>(payload: &[u8], datatype: i16, n: usize) -> Result<Vec<u32>, NiftiError> {
    let signed = |index: usize, v: i64| -> Result<u32, NiftiError> {
        if v < 0 {
            return Err(NiftiError::NegativeLabel {
                index,
                value: v as f64,
            });
        }
        Ok(v as u32)
    };
    match datatype {
        DT_UINT8 => Ok(payload.iter().map(|&b| b as u32).collect()),
        DT_INT16 => (0..n)
            .map(|i| signed(i, B::read_i16(&payload[2 * i..]) as i64))
            .collect(),
        DT_INT32 => (0..n)
            .map(|i| signed(i, B::read_i32(&payload[4 * i..]) as i64))
            .collect(),
        DT_FLOAT32 => (0..n)
            .map(|i| {
                let value = B::read_f32(&payload[4 * i..]) as f64;
                let rounded = value.round();
                if !value.is_finite() || (value - rounded).abs() > FLOAT_LABEL_TOLERANCE {
                    return Err(NiftiError::NonIntegralLabel { index: i, value });
                }
                if rounded < 0.0 {
                    return Err(NiftiError::NegativeLabel { index: i, value });
                }
                if rounded > u32::MAX as f64 {
                    return Err(NiftiError::NonIntegralLabel { index: i, value });
                }
                Ok(rounded as u32)
            })
            .collect(),
        other => Err(NiftiError::UnsupportedDatatype(other)),
    }
}
