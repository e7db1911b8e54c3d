//! Coefficient tensor files.
//!
//! Text (sparse; unlisted entries are zero):
//!
//! ```text
//! chaos-tensor v1
//! order 2
//! side 3
//! flags symmetric zero_diagonal
//! # i j value, 0-based
//! 0 1 0.5
//! 1 0 0.5
//! ```
//!
//! Binary (little-endian): 8-byte magic `CHAOSTEN`, `u32` version (1),
//! `u32` flag bits (1 = symmetric, 2 = zero diagonal), `u32` order,
//! `u32` side, then `side^order` row-major `f64` entries.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use concentra_core::chaos::{CoefficientTensor, MAX_ORDER};

pub const MAGIC: &[u8; 8] = b"CHAOSTEN";
pub const VERSION: u32 = 1;
const TEXT_HEADER: &str = "chaos-tensor v1";
const SYMMETRIC: u32 = 1;
const ZERO_DIAGONAL: u32 = 2;
/// Largest entry count accepted from a file.
const MAX_ENTRIES: usize = 1 << 26;

fn entry_count(order: usize, side: usize) -> Result<usize> {
    ensure!(
        (1..=MAX_ORDER).contains(&order),
        "order {order} outside 1..={MAX_ORDER}"
    );
    ensure!(side >= 1, "side must be positive");
    side.checked_pow(order as u32)
        .filter(|&n| n <= MAX_ENTRIES)
        .ok_or_else(|| anyhow!("tensor with side {side} and order {order} is too large"))
}

pub fn parse_text(text: &str) -> Result<CoefficientTensor> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| lines.next().ok_or_else(|| anyhow!("missing {what} line"));
    let (_, header) = next("header")?;
    ensure!(
        header == TEXT_HEADER,
        "expected header `{TEXT_HEADER}`, found `{header}`"
    );
    let mut field = |key: &str| -> Result<(usize, Vec<String>)> {
        let (no, line) = next(key)?;
        let mut parts = line.split_whitespace();
        ensure!(parts.next() == Some(key), "line {no}: expected `{key} ...`");
        Ok((no, parts.map(String::from).collect()))
    };
    let parse_one = |(no, v): (usize, Vec<String>), key: &str| -> Result<usize> {
        ensure!(v.len() == 1, "line {no}: `{key}` takes one value");
        v[0].parse()
            .with_context(|| format!("line {no}: bad {key}"))
    };
    let order = parse_one(field("order")?, "order")?;
    let side = parse_one(field("side")?, "side")?;
    let (no, flags) = field("flags")?;
    let (mut symmetric, mut zero_diagonal) = (false, false);
    for f in &flags {
        match f.as_str() {
            "symmetric" => symmetric = true,
            "zero_diagonal" => zero_diagonal = true,
            "none" => {}
            other => bail!("line {no}: unknown flag `{other}`"),
        }
    }
    let mut entries = vec![0.0; entry_count(order, side)?];
    let mut seen = vec![false; entries.len()];
    for (no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        ensure!(
            parts.len() == order + 1,
            "line {no}: expected {order} indices and a value"
        );
        let mut flat = 0usize;
        for p in &parts[..order] {
            let i: usize = p
                .parse()
                .with_context(|| format!("line {no}: bad index `{p}`"))?;
            ensure!(
                i < side,
                "line {no}: index {i} out of range for side {side}"
            );
            flat = flat * side + i;
        }
        let v: f64 = parts[order]
            .parse()
            .with_context(|| format!("line {no}: bad value"))?;
        ensure!(v.is_finite(), "line {no}: value must be finite");
        ensure!(!seen[flat], "line {no}: duplicate index");
        seen[flat] = true;
        entries[flat] = v;
    }
    Ok(CoefficientTensor::new(
        order,
        side,
        entries,
        symmetric,
        zero_diagonal,
    )?)
}

pub fn to_text(t: &CoefficientTensor) -> String {
    let mut flags = Vec::new();
    if t.symmetric() {
        flags.push("symmetric");
    }
    if t.zero_diagonal() {
        flags.push("zero_diagonal");
    }
    if flags.is_empty() {
        flags.push("none");
    }
    let mut out = format!(
        "{TEXT_HEADER}\norder {}\nside {}\nflags {}\n",
        t.order(),
        t.side(),
        flags.join(" ")
    );
    for (flat, &v) in t.entries().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut idx = vec![0; t.order()];
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % t.side();
            rest /= t.side();
        }
        let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("{} {v:?}\n", idx.join(" ")));
    }
    out
}

pub fn parse_binary(bytes: &[u8]) -> Result<CoefficientTensor> {
    let mut r = bytes;
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).context("truncated header")?;
    ensure!(&magic == MAGIC, "not a binary tensor file");
    let mut word = || -> Result<u32> {
        let mut b = [0u8; 4];
        r.read_exact(&mut b).context("truncated header")?;
        Ok(u32::from_le_bytes(b))
    };
    let version = word()?;
    ensure!(version == VERSION, "unsupported binary version {version}");
    let flags = word()?;
    ensure!(
        flags & !(SYMMETRIC | ZERO_DIAGONAL) == 0,
        "unknown flag bits {flags:#x}"
    );
    let order = word()? as usize;
    let side = word()? as usize;
    let n = entry_count(order, side)?;
    let body = &bytes[24..];
    ensure!(
        body.len() == 8 * n,
        "expected {} bytes of entries, found {}",
        8 * n,
        body.len()
    );
    let entries = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(CoefficientTensor::new(
        order,
        side,
        entries,
        flags & SYMMETRIC != 0,
        flags & ZERO_DIAGONAL != 0,
    )?)
}

pub fn to_binary(t: &CoefficientTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * t.entries().len());
    out.extend_from_slice(MAGIC);
    let flags = (t.symmetric() as u32) * SYMMETRIC + (t.zero_diagonal() as u32) * ZERO_DIAGONAL;
    for w in [VERSION, flags, t.order() as u32, t.side() as u32] {
        out.extend_from_slice(&w.to_le_bytes());
    }
    for v in t.entries() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Reads either format, telling them apart by the magic bytes.
pub fn read_tensor(path: &Path) -> Result<CoefficientTensor> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = if bytes.starts_with(MAGIC) {
        parse_binary(&bytes)
    } else {
        std::str::from_utf8(&bytes)
            .context("text tensor is not UTF-8")
            .and_then(parse_text)
    };
    parsed.with_context(|| format!("in {}", path.display()))
}

pub fn write_tensor(path: &Path, t: &CoefficientTensor, binary: bool) -> Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    if binary {
        f.write_all(&to_binary(t))?;
    } else {
        f.write_all(to_text(t).as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_example() {
        let t = parse_text(
            "chaos-tensor v1\norder 2\nside 3\nflags symmetric zero_diagonal\n# c\n0 1 0.5\n1 0 0.5\n",
        )
        .unwrap();
        assert_eq!(t.get(&[0, 1]), 0.5);
        assert_eq!(t.get(&[2, 2]), 0.0);
        assert!(t.symmetric() && t.zero_diagonal());
        assert_eq!(parse_text(&to_text(&t)).unwrap(), t);
    }

    #[test]
    fn text_rejections() {
        let head = "chaos-tensor v1\norder 2\nside 2\nflags none\n";
        for body in ["0 2 1.0", "0 1", "0 1 x", "0 1 1.0\n0 1 2.0", "0 1 inf"] {
            assert!(parse_text(&format!("{head}{body}\n")).is_err(), "{body}");
        }
        assert!(parse_text("chaos-tensor v2\norder 1\nside 1\nflags none\n").is_err());
        assert!(parse_text("chaos-tensor v1\norder 1\nside 1\nflags shiny\n").is_err());
        // flag claims that do not hold are rejected by the tensor itself
        assert!(
            parse_text("chaos-tensor v1\norder 2\nside 2\nflags symmetric\n0 1 1.0\n").is_err()
        );
    }

    #[test]
    fn binary_round_trip_and_header() {
        let t =
            CoefficientTensor::new(3, 2, (0..8).map(|i| i as f64 - 3.5).collect(), false, false)
                .unwrap();
        let b = to_binary(&t);
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(b.len(), 24 + 64);
        assert_eq!(parse_binary(&b).unwrap(), t);
        assert!(parse_binary(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[8] = 2;
        assert!(parse_binary(&bad).is_err());
    }
}
