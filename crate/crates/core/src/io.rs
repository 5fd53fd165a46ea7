//! File formats: arrays (JSON and a raw binary variant for integers) and
//! explicit forbidden families.

use serde::{Deserialize, Serialize};

use crate::arrays::{Array, Token};
use crate::error::{Error, Result};
use crate::property::{AlphabetKind, ExplicitFamily, LocalProperty};

/// One JSON symbol: an integer or a token name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawSymbol {
    Int(i64),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetSpec {
    pub kind: AlphabetKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ArrayFile {
    n: usize,
    d: usize,
    alphabet: AlphabetSpec,
    data: Vec<RawSymbol>,
}

/// An array read from disk, with its alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoadedArray {
    Int(Array<i64>),
    /// `Token(i)` stands for `names[i]`.
    Tokens { array: Array<Token>, names: Vec<String> },
}

impl LoadedArray {
    pub fn alphabet_kind(&self) -> AlphabetKind {
        match self {
            LoadedArray::Int(_) => AlphabetKind::Int,
            LoadedArray::Tokens { .. } => AlphabetKind::Tokens,
        }
    }
}

fn token_of(names: &[String], s: &RawSymbol) -> Result<Token> {
    match s {
        RawSymbol::Name(name) => names
            .iter()
            .position(|t| t == name)
            .map(|i| Token(i as u32))
            .ok_or_else(|| Error::Format(format!("token {name:?} is not declared"))),
        RawSymbol::Int(v) => Err(Error::Format(format!("integer {v} in a token array"))),
    }
}

fn int_of(s: &RawSymbol) -> Result<i64> {
    match s {
        RawSymbol::Int(v) => Ok(*v),
        RawSymbol::Name(t) => Err(Error::Format(format!("token {t:?} in an integer array"))),
    }
}

pub fn parse_array_json(text: &str) -> Result<LoadedArray> {
    let f: ArrayFile = serde_json::from_str(text)?;
    match f.alphabet.kind {
        AlphabetKind::Int => {
            let data = f.data.iter().map(int_of).collect::<Result<_>>()?;
            Ok(LoadedArray::Int(Array::new(f.n, f.d, data)?))
        }
        AlphabetKind::Tokens => {
            let names = f.alphabet.tokens;
            let data = f.data.iter().map(|s| token_of(&names, s)).collect::<Result<_>>()?;
            Ok(LoadedArray::Tokens { array: Array::new(f.n, f.d, data)?, names })
        }
    }
}

pub fn array_to_json(a: &LoadedArray) -> Result<String> {
    let f = match a {
        LoadedArray::Int(a) => ArrayFile {
            n: a.n(),
            d: a.d(),
            alphabet: AlphabetSpec { kind: AlphabetKind::Int, tokens: vec![] },
            data: a.data().iter().map(|&v| RawSymbol::Int(v)).collect(),
        },
        LoadedArray::Tokens { array, names } => ArrayFile {
            n: array.n(),
            d: array.d(),
            alphabet: AlphabetSpec { kind: AlphabetKind::Tokens, tokens: names.clone() },
            data: array.data().iter().map(|t| RawSymbol::Name(names[t.0 as usize].clone())).collect(),
        },
    };
    Ok(serde_json::to_string(&f)?)
}

const MAGIC: &[u8; 4] = b"LTAR";

/// Header `LTAR`, then `n`, `d`, and the value width in bytes (u32 LE each),
/// then row-major signed little-endian values.
pub fn write_array_binary(a: &Array<i64>, width: usize) -> Result<Vec<u8>> {
    if ![1, 2, 4, 8].contains(&width) {
        return Err(Error::Argument(format!("value width {width} is not 1, 2, 4 or 8")));
    }
    let bits = 8 * width as u32;
    let mut out = Vec::with_capacity(16 + width * a.len());
    out.extend_from_slice(MAGIC);
    for x in [a.n(), a.d(), width] {
        out.extend_from_slice(&u32::try_from(x).map_err(|_| Error::Argument("header field overflows u32".into()))?.to_le_bytes());
    }
    for &v in a.data() {
        if bits < 64 && (v < -(1i64 << (bits - 1)) || v >= 1i64 << (bits - 1)) {
            return Err(Error::Range(format!("value {v} does not fit in {width} bytes")));
        }
        out.extend_from_slice(&v.to_le_bytes()[..width]);
    }
    Ok(out)
}

pub fn read_array_binary(bytes: &[u8]) -> Result<Array<i64>> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing LTAR header".into()));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes")) as usize;
    let (n, d, width) = (field(1), field(2), field(3));
    if ![1, 2, 4, 8].contains(&width) {
        return Err(Error::Format(format!("value width {width} is not 1, 2, 4 or 8")));
    }
    let body = &bytes[16..];
    if !body.len().is_multiple_of(width) {
        return Err(Error::Format("truncated value".into()));
    }
    let data = body
        .chunks_exact(width)
        .map(|c| {
            // Sign-extend from the top byte.
            let fill = if c[width - 1] & 0x80 != 0 { 0xff } else { 0 };
            let mut buf = [fill; 8];
            buf[..width].copy_from_slice(c);
            i64::from_le_bytes(buf)
        })
        .collect();
    Array::new(n, d, data).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FamilyFile {
    k: usize,
    d: usize,
    alphabet: Vec<RawSymbol>,
    forbidden: Vec<Vec<RawSymbol>>,
}

/// An explicit pattern-freeness property read from disk.
#[derive(Clone, Debug)]
pub enum LoadedFamily {
    Int(LocalProperty<i64>),
    Tokens { property: LocalProperty<Token>, names: Vec<String> },
}

pub fn parse_family_json(text: &str) -> Result<LoadedFamily> {
    let f: FamilyFile = serde_json::from_str(text)?;
    if f.alphabet.iter().all(|s| matches!(s, RawSymbol::Int(_))) {
        let alphabet: Vec<i64> = f.alphabet.iter().map(int_of).collect::<Result<_>>()?;
        let patterns = f
            .forbidden
            .iter()
            .map(|p| p.iter().map(int_of).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let family = ExplicitFamily::new(f.k, f.d, patterns)?;
        Ok(LoadedFamily::Int(LocalProperty::from_explicit(family, alphabet)?))
    } else {
        let names: Vec<String> = f
            .alphabet
            .iter()
            .map(|s| match s {
                RawSymbol::Name(t) => Ok(t.clone()),
                RawSymbol::Int(v) => Err(Error::Format(format!("mixed alphabet: integer {v} among tokens"))),
            })
            .collect::<Result<_>>()?;
        let patterns = f
            .forbidden
            .iter()
            .map(|p| p.iter().map(|s| token_of(&names, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let family = ExplicitFamily::new(f.k, f.d, patterns)?;
        let alphabet = (0..names.len() as u32).map(Token).collect();
        Ok(LoadedFamily::Tokens { property: LocalProperty::from_explicit(family, alphabet)?, names })
    }
}

pub fn family_to_json(k: usize, d: usize, alphabet: &[i64], forbidden: &[Vec<i64>]) -> Result<String> {
    let f = FamilyFile {
        k,
        d,
        alphabet: alphabet.iter().map(|&v| RawSymbol::Int(v)).collect(),
        forbidden: forbidden.iter().map(|p| p.iter().map(|&v| RawSymbol::Int(v)).collect()).collect(),
    };
    Ok(serde_json::to_string(&f)?)
}
