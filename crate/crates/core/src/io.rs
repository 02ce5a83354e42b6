//! Kernel files (JSON and raw little-endian binary) and benchmark records.
//!
//! Raw layout: the 16-byte [`RAW_MAGIC`], then `cout`, `cin`, `s` as
//! little-endian `u32`, then `cout·cin·s·s` little-endian `f64` values in the
//! kernel's row-major order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernel::Kernel4;
use crate::scalar::Scalar;

pub const RAW_MAGIC: [u8; 16] = *b"LIPBOUND-KERNEL\0";
const RAW_HEADER_LEN: usize = 16 + 3 * 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFormat {
    Json,
    Raw,
}

impl KernelFormat {
    /// `.json` is JSON, anything else is raw.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => KernelFormat::Json,
            _ => KernelFormat::Raw,
        }
    }
}

impl FromStr for KernelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(KernelFormat::Json),
            "raw" => Ok(KernelFormat::Raw),
            other => Err(Error::Parameter(format!(
                "unknown kernel format `{other}` (expected json or raw)"
            ))),
        }
    }
}

pub fn load_kernel<T: Scalar>(path: impl AsRef<Path>, format: KernelFormat) -> Result<Kernel4<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        KernelFormat::Json => kernel_from_json(&bytes),
        KernelFormat::Raw => kernel_from_raw(&bytes),
    }
}

pub fn save_kernel<T: Scalar>(
    kernel: &Kernel4<T>,
    path: impl AsRef<Path>,
    format: KernelFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        KernelFormat::Json => kernel_to_json(kernel).into_bytes(),
        KernelFormat::Raw => kernel_to_raw(kernel),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn kernel_to_json<T: Scalar>(kernel: &Kernel4<T>) -> String {
    let data: Vec<f64> = kernel.data().iter().map(|x| x.to_f64_lossy()).collect();
    serde_json::json!({
        "cout": kernel.cout(),
        "cin": kernel.cin(),
        "s": kernel.size(),
        "data": data,
    })
    .to_string()
}

pub fn kernel_from_json<T: Scalar>(bytes: &[u8]) -> Result<Kernel4<T>> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        field: "<document>".into(),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Parse {
        field: "<document>".into(),
        message: "expected a JSON object".into(),
    })?;

    let dim = |name: &str| -> Result<usize> {
        let v = obj.get(name).ok_or_else(|| Error::Parse {
            field: name.into(),
            message: "missing".into(),
        })?;
        v.as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| Error::Parse {
                field: name.into(),
                message: format!("expected a non-negative integer, got {v}"),
            })
    };
    let (cout, cin, s) = (dim("cout")?, dim("cin")?, dim("s")?);

    let raw = obj
        .get("data")
        .ok_or_else(|| Error::Parse {
            field: "data".into(),
            message: "missing".into(),
        })?
        .as_array()
        .ok_or_else(|| Error::Parse {
            field: "data".into(),
            message: "expected an array of numbers".into(),
        })?;
    let data = raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64().map(T::from_f64_lossy).ok_or_else(|| Error::Parse {
                field: format!("data[{i}]"),
                message: format!("expected a number, got {v}"),
            })
        })
        .collect::<Result<Vec<T>>>()?;

    Kernel4::new(cout, cin, s, data)
}

pub fn kernel_to_raw<T: Scalar>(kernel: &Kernel4<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 8 * kernel.data().len());
    out.extend_from_slice(&RAW_MAGIC);
    for dim in [kernel.cout(), kernel.cin(), kernel.size()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for x in kernel.data() {
        out.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
    }
    out
}

pub fn kernel_from_raw<T: Scalar>(bytes: &[u8]) -> Result<Kernel4<T>> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(Error::Parse {
            field: "header".into(),
            message: format!("file has {} bytes, header needs {RAW_HEADER_LEN}", bytes.len()),
        });
    }
    if bytes[..16] != RAW_MAGIC {
        return Err(Error::Parse {
            field: "magic".into(),
            message: "not a raw kernel file".into(),
        });
    }
    let read_u32 = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (cout, cin, s) = (read_u32(16), read_u32(20), read_u32(24));

    let payload = &bytes[RAW_HEADER_LEN..];
    if !payload.len().is_multiple_of(8) {
        return Err(Error::Parse {
            field: "data".into(),
            message: format!("payload of {} bytes is not a whole number of f64", payload.len()),
        });
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| T::from_f64_lossy(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Kernel4::new(cout, cin, s, data)
}

/// Estimators that appear in benchmark tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lipbound,
    PowerMethod,
    Sedghi,
    Frobenius,
    DenseOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lipbound => "lipbound",
            Method::PowerMethod => "power_method",
            Method::Sedghi => "sedghi",
            Method::Frobenius => "frobenius",
            Method::DenseOracle => "dense_oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One timed estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: Method,
    pub value: f64,
    /// Milliseconds.
    pub wall_time: f64,
    pub params: BTreeMap<String, Value>,
}

impl BenchRecord {
    pub fn new(method: Method, value: f64, wall_time: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Validation(format!("{method} value {value} must be >= 0")));
        }
        if wall_time.is_nan() || wall_time < 0.0 {
            return Err(Error::Validation(format!("wall time {wall_time} must be >= 0")));
        }
        Ok(Self {
            method,
            value,
            wall_time,
            params: BTreeMap::new(),
        })
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }
}
