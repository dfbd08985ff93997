//! Flat named-array parameter container.
//!
//! Binary layout (little endian throughout):
//!
//! ```text
//! magic   8 bytes  "PFNPARAM"
//! version u32      currently 1
//! count   u32      number of entries
//! entry*  u32 name length, name bytes (utf-8),
//!         u32 ndim, u64 dims...,
//!         f64 values in row-major order
//! ```
//!
//! Fitted predictor parameters are stored as named arrays so files stay
//! readable across versions of the parameter structs.

use crate::linalg::Mat;
use crate::predictors::{
    BandwidthScaling, EnsembleParams, HeadParams, TransformerParams, TreeParams,
    WindowSmootherParams,
};
use std::io::{self, Read, Write};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"PFNPARAM";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("bad magic bytes; not a parameter container")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("entry {0} missing from container")]
    MissingEntry(String),
    #[error("entry {name} has shape {got:?}, expected {expected:?}")]
    ShapeMismatch { name: String, expected: Vec<u64>, got: Vec<u64> },
    #[error("container is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One named array.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub dims: Vec<u64>,
    pub values: Vec<f64>,
}

impl NamedArray {
    pub fn scalar(name: &str, value: f64) -> Self {
        NamedArray { name: name.to_string(), dims: vec![], values: vec![value] }
    }

    pub fn vector(name: &str, values: Vec<f64>) -> Self {
        NamedArray { name: name.to_string(), dims: vec![values.len() as u64], values }
    }

    pub fn matrix(name: &str, m: &Mat) -> Self {
        NamedArray {
            name: name.to_string(),
            dims: vec![m.rows() as u64, m.cols() as u64],
            values: m.data().to_vec(),
        }
    }

    pub fn to_mat(&self) -> Result<Mat, ContainerError> {
        if self.dims.len() != 2 {
            return Err(ContainerError::ShapeMismatch {
                name: self.name.clone(),
                expected: vec![0, 0],
                got: self.dims.clone(),
            });
        }
        Ok(Mat::from_vec(self.dims[0] as usize, self.dims[1] as usize, self.values.clone()))
    }
}

/// An ordered collection of named arrays.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Container {
    pub entries: Vec<NamedArray>,
}

impl Container {
    pub fn new() -> Self {
        Container::default()
    }

    pub fn push(&mut self, entry: NamedArray) {
        self.entries.push(entry);
    }

    pub fn get(&self, name: &str) -> Result<&NamedArray, ContainerError> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| ContainerError::MissingEntry(name.to_string()))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), ContainerError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        for e in &self.entries {
            let name = e.name.as_bytes();
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name)?;
            w.write_all(&(e.dims.len() as u32).to_le_bytes())?;
            for &d in &e.dims {
                w.write_all(&d.to_le_bytes())?;
            }
            let expect: u64 = e.dims.iter().product::<u64>().max(1);
            if expect as usize != e.values.len() {
                return Err(ContainerError::Malformed(format!(
                    "entry {} declares {} values but holds {}",
                    e.name,
                    expect,
                    e.values.len()
                )));
            }
            for &v in &e.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ContainerError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(ContainerError::UnsupportedVersion(version));
        }
        let count = read_u32(&mut r)? as usize;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = read_u32(&mut r)? as usize;
            if name_len > 1 << 16 {
                return Err(ContainerError::Malformed("entry name too long".into()));
            }
            let mut name_bytes = vec![0u8; name_len];
            r.read_exact(&mut name_bytes)?;
            let name = String::from_utf8(name_bytes)
                .map_err(|_| ContainerError::Malformed("entry name is not utf-8".into()))?;
            let ndim = read_u32(&mut r)? as usize;
            if ndim > 8 {
                return Err(ContainerError::Malformed("too many dimensions".into()));
            }
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(read_u64(&mut r)?);
            }
            let len = dims.iter().product::<u64>().max(1);
            if len > 1 << 32 {
                return Err(ContainerError::Malformed("entry too large".into()));
            }
            let mut values = Vec::with_capacity(len as usize);
            let mut buf = [0u8; 8];
            for _ in 0..len {
                r.read_exact(&mut buf)?;
                values.push(f64::from_le_bytes(buf));
            }
            entries.push(NamedArray { name, dims, values });
        }
        Ok(Container { entries })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ContainerError> {
        let file = std::fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ContainerError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(io::BufReader::new(file))
    }
}

// --- predictor parameter encodings -----------------------------------

pub fn encode_transformer(params: &TransformerParams) -> Container {
    let mut c = Container::new();
    c.push(NamedArray::scalar("kind", 2.0));
    c.push(NamedArray::scalar("heads", params.num_heads() as f64));
    for (h, head) in params.heads.iter().enumerate() {
        c.push(NamedArray::matrix(&format!("head.{h}.w_q"), &head.w_q));
        c.push(NamedArray::matrix(&format!("head.{h}.w_v"), &head.w_v));
    }
    c.push(NamedArray::matrix("w_r1", &params.w_r1));
    c.push(NamedArray::matrix("w_r2", &params.w_r2));
    c.push(NamedArray::matrix("w_o", &params.w_o));
    c.push(NamedArray::vector("gamma", params.gamma.to_vec()));
    c
}

pub fn decode_transformer(c: &Container) -> Result<TransformerParams, ContainerError> {
    let heads = c.get("heads")?.values[0] as usize;
    let mut head_params = Vec::with_capacity(heads);
    for h in 0..heads {
        head_params.push(HeadParams {
            w_q: c.get(&format!("head.{h}.w_q"))?.to_mat()?,
            w_v: c.get(&format!("head.{h}.w_v"))?.to_mat()?,
        });
    }
    let gamma_entry = c.get("gamma")?;
    if gamma_entry.values.len() != 3 {
        return Err(ContainerError::ShapeMismatch {
            name: "gamma".into(),
            expected: vec![3],
            got: gamma_entry.dims.clone(),
        });
    }
    let params = TransformerParams {
        heads: head_params,
        w_r1: c.get("w_r1")?.to_mat()?,
        w_r2: c.get("w_r2")?.to_mat()?,
        w_o: c.get("w_o")?.to_mat()?,
        gamma: [gamma_entry.values[0], gamma_entry.values[1], gamma_entry.values[2]],
    };
    params
        .validate()
        .map_err(|e| ContainerError::Malformed(format!("invalid transformer parameters: {e}")))?;
    Ok(params)
}

pub fn encode_window(params: &WindowSmootherParams) -> Container {
    let mut c = Container::new();
    c.push(NamedArray::scalar("kind", 0.0));
    c.push(NamedArray::scalar("bandwidth", params.bandwidth));
    c.push(NamedArray::scalar(
        "scaled",
        match params.scaling {
            BandwidthScaling::Fixed => 0.0,
            BandwidthScaling::Scaled => 1.0,
        },
    ));
    c
}

pub fn decode_window(c: &Container) -> Result<WindowSmootherParams, ContainerError> {
    let bandwidth = c.get("bandwidth")?.values[0];
    if !(bandwidth > 0.0) {
        return Err(ContainerError::Malformed(format!("bandwidth {bandwidth} must be positive")));
    }
    let scaling = if c.get("scaled")?.values[0] == 0.0 {
        BandwidthScaling::Fixed
    } else {
        BandwidthScaling::Scaled
    };
    Ok(WindowSmootherParams { bandwidth, scaling })
}

pub fn encode_ensemble(params: &EnsembleParams) -> Container {
    let mut c = Container::new();
    c.push(NamedArray::scalar("kind", 1.0));
    c.push(NamedArray::scalar("members", params.members().len() as f64));
    for (k, tree) in params.members().iter().enumerate() {
        c.push(NamedArray::vector(&format!("member.{k}.splits"), tree.splits().to_vec()));
    }
    c
}

pub fn decode_ensemble(c: &Container) -> Result<EnsembleParams, ContainerError> {
    let members = c.get("members")?.values[0] as usize;
    let mut trees = Vec::with_capacity(members);
    for k in 0..members {
        trees.push(TreeParams::new(c.get(&format!("member.{k}.splits"))?.values.clone()));
    }
    if trees.is_empty() {
        return Err(ContainerError::Malformed("ensemble has no members".into()));
    }
    Ok(EnsembleParams::new(trees))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, ContainerError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, ContainerError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
