//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! | field        | type       |
//! |--------------|------------|
//! | magic        | `b"NS1D"`  |
//! | version      | `u32` = 1  |
//! | config hash  | `u64`      |
//! | t            | `f64`      |
//! | n            | `u64`      |
//! | L            | `f64`      |
//! | gamma        | `f64`      |
//! | kind         | `u8` (0 constant, 1 power law) |
//! | mu0, kappa0, beta_mu, beta_kappa | `4 × f64` |
//! | v, u, theta  | `3n × f64` |

use std::path::Path;

use crate::error::{Error, Result};
use crate::gas::{TransportKind, TransportLaw};
use crate::grid::{Grid, State};

pub const MAGIC: &[u8; 4] = b"NS1D";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8 + 8 + 1 + 4 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: u64,
    pub half_width: f64,
    pub gamma: f64,
    pub law: TransportLaw<f64>,
    pub state: State<f64>,
}

impl Checkpoint {
    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::new(self.state.len(), self.half_width)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.state.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 24 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.config_hash.to_le_bytes());
        out.extend_from_slice(&self.state.t.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&self.half_width.to_le_bytes());
        out.extend_from_slice(&self.gamma.to_le_bytes());
        out.push(match self.law.kind() {
            TransportKind::Constant => 0,
            TransportKind::PowerLaw => 1,
        });
        for x in [
            self.law.mu0(),
            self.law.kappa0(),
            self.law.beta_mu(),
            self.law.beta_kappa(),
        ] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for field in [&self.state.v, &self.state.u, &self.state.theta] {
            for x in field {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Checkpoint("bad magic, not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let config_hash = r.u64()?;
        let t = r.f64()?;
        let n = usize::try_from(r.u64()?).map_err(|_| Error::Checkpoint("n overflows".into()))?;
        let half_width = r.f64()?;
        let gamma = r.f64()?;
        let kind = r.take(1)?[0];
        let (mu0, kappa0, beta_mu, beta_kappa) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
        let law = match kind {
            0 => TransportLaw::constant(mu0, kappa0)?,
            1 => TransportLaw::power_law(mu0, kappa0, beta_mu, beta_kappa)?,
            k => return Err(Error::Checkpoint(format!("unknown transport kind {k}"))),
        };
        let expected = n
            .checked_mul(24)
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::Checkpoint("n overflows".into()))?;
        if bytes.len() != expected {
            return Err(Error::Checkpoint(format!(
                "size {} does not match n = {n} (expected {expected})",
                bytes.len()
            )));
        }
        let mut field = || (0..n).map(|_| r.f64()).collect::<Result<Vec<f64>>>();
        let (v, u, theta) = (field()?, field()?, field()?);
        let grid = Grid::new(n, half_width)?;
        let state = State::new(&grid, v, u, theta, t)?;
        Ok(Self {
            config_hash,
            half_width,
            gamma,
            law,
            state,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize, seed: f64) -> Checkpoint {
        let grid = Grid::new(n, 3.5).unwrap();
        let mut state = State::equilibrium(&grid);
        for i in 0..n {
            let x = seed + i as f64;
            state.v[i] = 1.0 + 0.1 * x.sin();
            state.u[i] = 0.3 * x.cos() / 7.0;
            state.theta[i] = 1.0 + 0.01 * (x * 1.7).sin();
        }
        state.t = 1.0 / 3.0;
        Checkpoint {
            config_hash: 0xDEAD_BEEF_0123_4567,
            half_width: 3.5,
            gamma: 1.05,
            law: TransportLaw::kinetic(4.0, 1.2, 0.8).unwrap(),
            state,
        }
    }

    #[test]
    fn header_layout() {
        let bytes = sample(16, 0.0).to_bytes();
        assert_eq!(&bytes[..4], b"NS1D");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 0xDEAD_BEEF_0123_4567);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 1.0 / 3.0);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 16);
        assert_eq!(bytes[48], 1);
        assert_eq!(bytes.len(), HEADER_LEN + 3 * 16 * 8);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample(16, 0.0).to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[48] = 7;
        assert!(Checkpoint::from_bytes(&bad).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let c = sample(64, 2.0);
        c.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), c);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(n in 8usize..64, seed in -100.0f64..100.0) {
            let c = sample(2 * n, seed);
            let bytes = c.to_bytes();
            let back = Checkpoint::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            prop_assert_eq!(back, c);
        }
    }
}
