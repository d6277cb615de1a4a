//! Trained-model persistence: a text magic line, a JSON header describing
//! the architecture, loss weights, seed, dataset fingerprint, item indices,
//! and the parameter-block directory, followed by every block's values as
//! little-endian 64-bit floats (weights row-major, then biases, in block
//! order). Self-describing, portable, and byte-deterministic.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::DualDomainDataset;
use crate::error::{Error, Result};
use crate::model::{ArchSpec, D2DParams, HyperParams};

const MAGIC: &str = "d2d-checkpoint v1";

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct BlockEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    arch: ArchSpec,
    hyper: HyperParams,
    seed: u64,
    dataset_fingerprint: String,
    item_index_a: Vec<String>,
    item_index_b: Vec<String>,
    blocks: Vec<BlockEntry>,
}

/// A trained model plus everything needed to use it on its own: the loss
/// configuration (which fixes the output head), the training seed, and the
/// item indices of both domains so predictions can name items.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub params: D2DParams,
    pub hyper: HyperParams,
    pub seed: u64,
    /// Fingerprint of the dataset the model was trained on.
    pub dataset_fingerprint: u64,
    pub item_index_a: Vec<String>,
    pub item_index_b: Vec<String>,
}

fn block_directory(params: &D2DParams) -> Vec<BlockEntry> {
    params
        .blocks()
        .iter()
        .map(|b| BlockEntry {
            name: b.name.clone(),
            rows: b.out_dim(),
            cols: b.in_dim(),
        })
        .collect()
}

impl Checkpoint {
    pub fn arch(&self) -> &ArchSpec {
        &self.params.arch
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = Header {
            arch: self.params.arch.clone(),
            hyper: self.hyper,
            seed: self.seed,
            dataset_fingerprint: format!("{:016x}", self.dataset_fingerprint),
            item_index_a: self.item_index_a.clone(),
            item_index_b: self.item_index_b.clone(),
            blocks: block_directory(&self.params),
        };
        let file = File::create(path)
            .map_err(|e| Error::Checkpoint(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{MAGIC}")?;
        let header_json = serde_json::to_string(&header)
            .map_err(|e| Error::Checkpoint(format!("header serialization failed: {e}")))?;
        writeln!(w, "{header_json}")?;
        for block in self.params.blocks() {
            for &v in block.weight.data() {
                w.write_all(&v.to_le_bytes())?;
            }
            for &v in &block.bias {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let file = File::open(path)
            .map_err(|e| Error::Checkpoint(format!("cannot open {}: {e}", path.display())))?;
        let mut r = BufReader::new(file);
        let bad = |msg: String| Error::Checkpoint(format!("{}: {msg}", path.display()));

        let magic = read_line(&mut r)?.ok_or_else(|| bad("empty file".to_string()))?;
        if magic != MAGIC {
            return Err(bad(format!("expected '{MAGIC}', found '{magic}'")));
        }
        let header_json =
            read_line(&mut r)?.ok_or_else(|| bad("missing header line".to_string()))?;
        let header: Header = serde_json::from_str(&header_json)
            .map_err(|e| bad(format!("malformed header: {e}")))?;
        header.arch.validate()?;

        let mut params = D2DParams::zeroed(&header.arch)?;
        let expected = block_directory(&params);
        if header.blocks != expected {
            return Err(bad(format!(
                "block directory does not match the declared architecture \
                 (found {} blocks, expected {})",
                header.blocks.len(),
                expected.len()
            )));
        }
        if header.item_index_a.len() != header.arch.input_dims.0
            || header.item_index_b.len() != header.arch.input_dims.1
        {
            return Err(bad("item index lengths do not match input dims".to_string()));
        }

        let mut buf = [0u8; 8];
        for block in params.blocks_mut() {
            for v in block.weight.data_mut() {
                r.read_exact(&mut buf).map_err(|_| bad("truncated parameter data".to_string()))?;
                *v = f64::from_le_bytes(buf);
            }
            for v in &mut block.bias {
                r.read_exact(&mut buf).map_err(|_| bad("truncated parameter data".to_string()))?;
                *v = f64::from_le_bytes(buf);
            }
        }
        if r.read(&mut buf[..1]).map_err(Error::Io)? != 0 {
            return Err(bad("trailing bytes after parameter data".to_string()));
        }

        let fingerprint = u64::from_str_radix(&header.dataset_fingerprint, 16)
            .map_err(|e| bad(format!("bad dataset fingerprint: {e}")))?;
        Ok(Checkpoint {
            params,
            hyper: header.hyper,
            seed: header.seed,
            dataset_fingerprint: fingerprint,
            item_index_a: header.item_index_a,
            item_index_b: header.item_index_b,
        })
    }

    /// Compatibility check against a dataset: mismatched dimensions are an
    /// error; a mismatched fingerprint (same shapes, different content) is
    /// returned as a warning for the caller to surface.
    pub fn check_dataset(&self, ds: &DualDomainDataset) -> Result<Vec<String>> {
        let dims = (ds.domain_a().n_items(), ds.domain_b().n_items());
        if dims != self.params.arch.input_dims {
            return Err(Error::Checkpoint(format!(
                "dataset has item counts {dims:?} but the checkpoint was trained for {:?}",
                self.params.arch.input_dims
            )));
        }
        let mut warnings = Vec::new();
        if ds.fingerprint() != self.dataset_fingerprint {
            warnings.push(format!(
                "dataset fingerprint {:016x} differs from the checkpoint's {:016x}; \
                 metrics may not be comparable",
                ds.fingerprint(),
                self.dataset_fingerprint
            ));
        }
        Ok(warnings)
    }
}

fn read_line<R: Read>(r: &mut R) -> Result<Option<String>> {
    // byte-at-a-time keeps the reader positioned exactly at the start of the
    // binary payload after the final header newline
    let mut line = Vec::new();
    let mut buf = [0u8; 1];
    loop {
        match r.read(&mut buf).map_err(Error::Io)? {
            0 => {
                return if line.is_empty() {
                    Ok(None)
                } else {
                    Ok(Some(String::from_utf8_lossy(&line).into_owned()))
                }
            }
            _ if buf[0] == b'\n' => {
                return Ok(Some(String::from_utf8_lossy(&line).into_owned()))
            }
            _ => line.push(buf[0]),
        }
    }
}
