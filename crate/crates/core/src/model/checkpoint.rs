//! Checkpoint container.
//!
//! ```text
//! mtan-checkpoint v1
//! config <key> <value>          one line per model config key
//! vocab <n>
//! <word>\t<cand id>,<cand id>…  n lines
//! tensor <name> <d0> [<d1>]     one line per parameter, in order
//! payload <bytes>
//! <row-major little-endian f64 data for every tensor, in order>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{ModelConfig, ModelParameters, Network};
use crate::error::{Error, Result};
use crate::ndcore::Tensor;
use crate::resources::Vocabulary;

pub const CHECKPOINT_MAGIC: &str = "mtan-checkpoint v1";

pub fn write_checkpoint<W: Write>(net: &Network, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{CHECKPOINT_MAGIC}")?;
    for (k, v) in net.config.to_pairs() {
        writeln!(out, "config {k} {v}")?;
    }
    writeln!(out, "vocab {}", net.vocab.len())?;
    for (word, cands) in net.vocab.words().iter().zip(net.vocab.all_candidates()) {
        let ids: Vec<String> = cands.iter().map(usize::to_string).collect();
        writeln!(out, "{word}\t{}", ids.join(","))?;
    }
    let mut bytes = 0usize;
    for (name, t) in net.params.iter() {
        let dims: Vec<String> = t.shape().iter().map(usize::to_string).collect();
        writeln!(out, "tensor {name} {}", dims.join(" "))?;
        bytes += t.len() * 8;
    }
    writeln!(out, "payload {bytes}")?;
    for t in net.params.tensors() {
        for x in t.data() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_checkpoint(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint(net, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&mut BufReader::new(file))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn next_line<R: BufRead>(r: &mut R) -> Result<String> {
    let mut line = String::new();
    let n = r
        .read_line(&mut line)
        .map_err(|e| bad(format!("read failed: {e}")))?;
    if n == 0 {
        return Err(bad("unexpected end of header"));
    }
    Ok(line.trim_end_matches(['\n', '\r']).to_string())
}

pub fn read_checkpoint<R: BufRead>(r: &mut R) -> Result<Network> {
    if next_line(r)? != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint or unsupported version"));
    }
    let mut config = ModelConfig::default();
    let mut line = next_line(r)?;
    while let Some(rest) = line.strip_prefix("config ") {
        let (k, v) = rest
            .split_once(' ')
            .ok_or_else(|| bad(format!("malformed config line {line:?}")))?;
        config.set(k, v)?;
        line = next_line(r)?;
    }
    config.validate()?;

    let n: usize = line
        .strip_prefix("vocab ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("expected vocab line, got {line:?}")))?;
    let mut words = Vec::with_capacity(n);
    let mut candidates = Vec::with_capacity(n);
    for _ in 0..n {
        let l = next_line(r)?;
        let (w, ids) = l
            .split_once('\t')
            .ok_or_else(|| bad(format!("malformed vocab line {l:?}")))?;
        let ids = ids
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| bad(format!("bad candidate id {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        words.push(w.to_string());
        candidates.push(ids);
    }

    let mut specs: Vec<(String, Vec<usize>)> = Vec::new();
    let mut line = next_line(r)?;
    while let Some(rest) = line.strip_prefix("tensor ") {
        let mut parts = rest.split(' ');
        let name = parts.next().unwrap_or_default().to_string();
        let dims = parts
            .map(|d| {
                d.parse::<usize>()
                    .map_err(|_| bad(format!("bad dim in {line:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        specs.push((name, dims));
        line = next_line(r)?;
    }
    let payload: usize = line
        .strip_prefix("payload ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("expected payload line, got {line:?}")))?;
    let expected: usize = specs
        .iter()
        .map(|(_, d)| d.iter().product::<usize>() * 8)
        .sum();
    if payload != expected {
        return Err(bad(format!(
            "payload is {payload} bytes, tensors need {expected}"
        )));
    }

    let mut named = Vec::with_capacity(specs.len());
    for (name, dims) in specs {
        let count: usize = dims.iter().product();
        let mut buf = vec![0u8; count * 8];
        r.read_exact(&mut buf)
            .map_err(|e| bad(format!("truncated payload in {name}: {e}")))?;
        let data = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        named.push((name, Tensor::new(dims, data)?));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| bad(e.to_string()))? != 0 {
        return Err(bad("trailing bytes after payload"));
    }

    let params = ModelParameters::from_named(&config, named)?;
    let embeddings = params
        .get(super::EMBEDDING)
        .cloned()
        .ok_or_else(|| bad("missing embedding tensor"))?;
    let vocab = Vocabulary::from_parts(words, candidates, embeddings)?;
    Ok(Network {
        config,
        vocab,
        params,
    })
}
