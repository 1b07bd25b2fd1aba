use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::wigner::{GridSpec, WignerGrid};

/// Twelve significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// JSON sidecar describing a binary grid dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMetadata {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub dtype: String,
    pub order: String,
}

impl WignerGrid {
    /// `x,p,W` rows, x varying slowest.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,p,W")?;
        for i in 0..self.spec.nx {
            let x = format_float(self.spec.x(i));
            for j in 0..self.spec.np {
                writeln!(out, "{x},{},{}", format_float(self.spec.p(j)), format_float(self.value(i, j)))?;
            }
        }
        Ok(())
    }

    /// Raw little-endian f64 values, row-major with x as the row index.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn metadata(&self) -> GridMetadata {
        GridMetadata {
            schema_version: 1,
            grid: self.spec,
            dtype: "f64-le".into(),
            order: "row-major, x index slowest".into(),
        }
    }

    pub fn read_binary<R: Read>(meta: &GridMetadata, mut input: R) -> Result<Self> {
        if meta.dtype != "f64-le" {
            return Err(Error::InvalidParameter(format!("unsupported dtype {}", meta.dtype)));
        }
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::InvalidParameter("truncated grid file".into()));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::new(meta.grid, values)
    }
}
