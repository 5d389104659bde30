use super::{DomainMap, ProxyNet};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const WEIGHT_FILE_VERSION: u32 = 1;

/// Versioned JSON weight file. Floats are written in shortest round-trip
/// form, so a save/load cycle reproduces every weight bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub version: u32,
    pub d: usize,
    pub k: usize,
    /// Row-major `k x d`.
    #[serde(rename = "W1")]
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: f64,
    pub domain_map: DomainMap,
    /// Free-form record of how the file was produced; ignored by the loader.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl WeightFile {
    pub fn new(net: &ProxyNet, domain_map: DomainMap) -> Result<Self> {
        if domain_map.dim() != net.dim() {
            return Err(Error::DimensionMismatch { expected: net.dim(), got: domain_map.dim() });
        }
        Ok(Self {
            version: WEIGHT_FILE_VERSION,
            d: net.dim(),
            k: net.neurons(),
            w1: net.w1().to_vec(),
            w2: net.w2().to_vec(),
            b1: net.b1().to_vec(),
            b2: net.b2(),
            domain_map,
            provenance: None,
        })
    }

    pub fn net(&self) -> Result<ProxyNet> {
        ProxyNet::new(self.d, self.k, self.w1.clone(), self.w2.clone(), self.b1.clone(), self.b2)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightFile = serde_json::from_str(text)?;
        if file.version != WEIGHT_FILE_VERSION {
            return Err(Error::WeightFile(format!("unsupported version {}", file.version)));
        }
        // validates shapes and finiteness
        file.net()?;
        if file.domain_map.dim() != file.d || file.domain_map.upper.len() != file.d {
            return Err(Error::WeightFile("domain_map dimension does not match d".into()));
        }
        file.domain_map.region()?;
        if !(file.domain_map.range_lo < file.domain_map.range_hi) {
            return Err(Error::WeightFile("empty value range".into()));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::WeightFile(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::WeightFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxy::test_nets::random_net;
    use crate::proxy::Hyperrect;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(seed in any::<u64>(), d in 1usize..5, k in 1usize..12, scale in 1e-3f64..1e3) {
            let net = random_net(d, k, scale, seed);
            let map = DomainMap::new(&Hyperrect::unit(d), -0.1 / 3.0, 7.0 / 3.0).unwrap();
            let file = WeightFile::new(&net, map).unwrap();
            let back = WeightFile::from_json(&file.to_json().unwrap()).unwrap();
            prop_assert_eq!(&back, &file);
            prop_assert_eq!(back.net().unwrap(), net);
        }
    }

    #[test]
    fn rejects_malformed() {
        let net = random_net(2, 3, 1.0, 0);
        let file = WeightFile::new(&net, DomainMap::identity(2)).unwrap();
        let mut bad = file.clone();
        bad.w1.pop();
        assert!(WeightFile::from_json(&serde_json::to_string(&bad).unwrap()).is_err());
        let mut bad = file.clone();
        bad.version = 99;
        assert!(WeightFile::from_json(&serde_json::to_string(&bad).unwrap()).is_err());
        assert!(WeightFile::from_json("{").is_err());
        assert!(WeightFile::new(&net, DomainMap::identity(3)).is_err());
    }
}
