//! `MVQ1` container: a fixed header followed by the bare stream.
//!
//! ```text
//! "MVQ1"  magic
//! u16 BE  width, height, min_block, max_block, d_max
//! u8      mode (0 interframe, 1 mixed, 2 temporal3d)
//! u8      flag (0 or 1)
//! ...     bare bitstream to end of file
//! ```

use std::fs;
use std::path::Path;

use crate::bits::Bitstream;
use crate::error::{Error, Result};
use crate::frame::GridGeometry;

pub const MAGIC: &[u8; 4] = b"MVQ1";
const HEADER_LEN: usize = 4 + 5 * 2 + 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContainerMode {
    Interframe = 0,
    Mixed = 1,
    Temporal3d = 2,
}

impl TryFrom<u8> for ContainerMode {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            0 => Ok(ContainerMode::Interframe),
            1 => Ok(ContainerMode::Mixed),
            2 => Ok(ContainerMode::Temporal3d),
            _ => Err(Error::Container(format!("unknown mode byte {b}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub geom: GridGeometry,
    pub d_max: u32,
    pub mode: ContainerMode,
    pub flag: bool,
    pub payload: Bitstream,
}

fn u16_field(name: &str, v: usize) -> Result<[u8; 2]> {
    u16::try_from(v)
        .map(u16::to_be_bytes)
        .map_err(|_| Error::Container(format!("{name} {v} does not fit in 16 bits")))
}

impl Container {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.byte_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&u16_field("width", self.geom.width())?);
        out.extend_from_slice(&u16_field("height", self.geom.height())?);
        out.extend_from_slice(&u16_field("min_block", self.geom.min_block())?);
        out.extend_from_slice(&u16_field("max_block", self.geom.max_block())?);
        out.extend_from_slice(&u16_field("d_max", self.d_max as usize)?);
        out.push(self.mode as u8);
        out.push(self.flag as u8);
        out.extend_from_slice(self.payload.bytes());
        Ok(out)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < HEADER_LEN {
            return Err(Error::Container(format!("{} bytes is shorter than the header", data.len())));
        }
        if &data[..4] != MAGIC {
            return Err(Error::Container("bad magic".into()));
        }
        let word = |i: usize| u16::from_be_bytes([data[4 + 2 * i], data[5 + 2 * i]]) as usize;
        let geom = GridGeometry::new(word(0), word(1), word(2), word(3))?;
        let d_max = word(4) as u32;
        let mode = ContainerMode::try_from(data[14])?;
        let flag = match data[15] {
            0 => false,
            1 => true,
            b => return Err(Error::Container(format!("flag byte {b}"))),
        };
        Ok(Container {
            geom,
            d_max,
            mode,
            flag,
            payload: Bitstream::from_bytes(data[HEADER_LEN..].to_vec()),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Container::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }
}
