use std::fs;
use std::io::Read;

use deltametric::wire::{CodeJson, ModelJson, SetJson, SpaceJson};
use deltametric::{coding::EncodedModel, DistanceSet, DvsCode, Error, ExactReal, Result, Space};
use serde::de::DeserializeOwned;

/// Reads a file, or standard input for `-`.
pub fn read_source(path: &str) -> Result<String> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Error::Malformed(format!("{path}: {e}")))?;
    Ok(text)
}

fn read_json<J: DeserializeOwned>(path: &str) -> Result<J> {
    let text = read_source(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{path}: {e}")))
}

pub fn read_set(path: &str) -> Result<DistanceSet> {
    read_json::<SetJson>(path)?.to_set()
}

pub fn read_space(path: &str) -> Result<Space> {
    read_json::<SpaceJson>(path)?.to_space()
}

pub fn read_code(path: &str) -> Result<DvsCode> {
    read_json::<CodeJson>(path)?.to_code()
}

pub fn read_model(path: &str) -> Result<EncodedModel<ExactReal>> {
    read_json::<ModelJson>(path)?.to_model()
}

/// A value-pair map file: `{"pairs": [["x", "f(x)"], ...]}`.
pub fn read_value_map(path: &str) -> Result<Vec<(ExactReal, ExactReal)>> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Pairs {
        pairs: Vec<[String; 2]>,
    }
    read_json::<Pairs>(path)?
        .pairs
        .iter()
        .map(|[a, b]| Ok((a.parse()?, b.parse()?)))
        .collect()
}

pub fn number(text: &str) -> Result<ExactReal> {
    ExactReal::parse_lenient(text)
}

pub fn numbers(text: &str) -> Result<Vec<ExactReal>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(number).collect()
}

pub fn label(space: &Space, l: &str) -> Result<usize> {
    space
        .index_of(l.trim())
        .ok_or_else(|| Error::Malformed(format!("no point labelled {l:?}")))
}

/// `"a=b,c=d"` as label pairs.
pub fn label_pairs(text: &str) -> Result<Vec<(String, String)>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|p| match p.split_once('=') {
            Some((a, b)) => Ok((a.trim().to_string(), b.trim().to_string())),
            None => Err(Error::Malformed(format!("expected label=label, got {p:?}"))),
        })
        .collect()
}
