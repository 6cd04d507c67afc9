//! `RRM1` model checkpoints.
//!
//! ```text
//! "RRM1" | u32 digest_len | digest bytes (UTF-8) | u32 tensor_count
//! per tensor: u32 name_len | name | u32 ndim | ndim × u32 dims | numel × f32
//! ```
//! All integers and floats little-endian.

use std::io::{ErrorKind, Read, Write};
use std::path::Path;

use crate::tensor::Tensor;

use super::params::ParamStore;
use super::NetError;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RRM1";

fn put_u32<W: Write>(w: &mut W, x: usize) -> std::io::Result<()> {
    let x = u32::try_from(x).map_err(|_| std::io::Error::new(ErrorKind::InvalidData, "value exceeds u32"))?;
    w.write_all(&x.to_le_bytes())
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize, NetError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(checkpoint_io)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn checkpoint_io(e: std::io::Error) -> NetError {
    NetError::Checkpoint(match e.kind() {
        ErrorKind::UnexpectedEof => "truncated checkpoint".to_string(),
        _ => e.to_string(),
    })
}

pub fn write_checkpoint<W: Write>(mut w: W, params: &ParamStore<f32>, digest: &str) -> Result<(), NetError> {
    let io = checkpoint_io;
    w.write_all(CHECKPOINT_MAGIC).map_err(io)?;
    put_u32(&mut w, digest.len()).map_err(io)?;
    w.write_all(digest.as_bytes()).map_err(io)?;
    put_u32(&mut w, params.len()).map_err(io)?;
    for (i, name) in params.names().iter().enumerate() {
        let t = params.value(i);
        put_u32(&mut w, name.len()).map_err(io)?;
        w.write_all(name.as_bytes()).map_err(io)?;
        put_u32(&mut w, t.shape().len()).map_err(io)?;
        for &d in t.shape() {
            put_u32(&mut w, d).map_err(io)?;
        }
        for x in t.data() {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Parameters and the config digest stored in a checkpoint.
pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(ParamStore<f32>, String), NetError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(checkpoint_io)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(NetError::Checkpoint("bad magic".into()));
    }
    let read_string = |r: &mut R| -> Result<String, NetError> {
        let n = get_u32(r)?;
        let mut b = vec![0u8; n];
        r.read_exact(&mut b).map_err(checkpoint_io)?;
        String::from_utf8(b).map_err(|_| NetError::Checkpoint("non-UTF-8 string".into()))
    };
    let digest = read_string(&mut r)?;
    let count = get_u32(&mut r)?;
    let mut params = ParamStore::new();
    for _ in 0..count {
        let name = read_string(&mut r)?;
        let ndim = get_u32(&mut r)?;
        let shape: Vec<usize> = (0..ndim).map(|_| get_u32(&mut r)).collect::<Result<_, _>>()?;
        let numel: usize = shape.iter().product();
        let mut bytes = vec![0u8; numel * 4];
        r.read_exact(&mut bytes).map_err(checkpoint_io)?;
        let data = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        if params.id(&name).is_some() {
            return Err(NetError::Checkpoint(format!("duplicate tensor {name}")));
        }
        params.insert(&name, Tensor::from_vec(&shape, data));
    }
    Ok((params, digest))
}

pub fn save_checkpoint(path: &Path, params: &ParamStore<f32>, digest: &str) -> Result<(), NetError> {
    let file = std::fs::File::create(path).map_err(checkpoint_io)?;
    write_checkpoint(std::io::BufWriter::new(file), params, digest)
}

pub fn load_checkpoint(path: &Path) -> Result<(ParamStore<f32>, String), NetError> {
    let file = std::fs::File::open(path).map_err(checkpoint_io)?;
    read_checkpoint(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> ParamStore<f32> {
        let mut ps = ParamStore::new();
        ps.insert("conv0.weight", Tensor::from_vec(&[2, 3], vec![1., -2., 3.5, 0., 1e-7, -0.0]));
        ps.insert("output.bias", Tensor::from_vec(&[2], vec![0.25, -8.0]));
        ps
    }

    #[test]
    fn round_trip() {
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &store(), "abc123").unwrap();
        assert_eq!(&buf[..4], b"RRM1");
        let (back, digest) = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(digest, "abc123");
        assert_eq!(back.names(), store().names());
        for i in 0..back.len() {
            assert_eq!(back.value(i), store().value(i));
        }
    }

    #[test]
    fn truncated_and_bad_magic() {
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &store(), "d").unwrap();
        assert!(read_checkpoint(&buf[..buf.len() - 2]).is_err());
        buf[0] = b'X';
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
