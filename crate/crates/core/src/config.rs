//! Model files (`recur-model/1`, TOML).
//!
//! ```toml
//! schema = "recur-model/1"
//! kind = "sft"            # full | sft | sgap | coded | interval
//! m = 2
//! forbidden = ["11"]
//! ```
//!
//! S-gap shifts use `[S]` with `set = [..]` and/or `min = N`; coded shifts use
//! `generators = [..]`; interval maps use `[interval_map]` with string
//! `alpha`/`beta` in any form [`Quad::parse`] accepts.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exact::Quad;
use crate::interval::AlphaBeta;
use crate::shift::{GapSet, SubshiftModel};
use crate::word::Word;

pub const MODEL_SCHEMA: &str = "recur-model/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    schema: String,
    kind: String,
    m: Option<u16>,
    #[serde(default)]
    forbidden: Vec<String>,
    #[serde(rename = "S")]
    s: Option<RawGap>,
    #[serde(default)]
    generators: Vec<String>,
    interval_map: Option<RawMap>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGap {
    #[serde(default)]
    set: Vec<u32>,
    min: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    alpha: String,
    beta: String,
}

pub fn parse_model(text: &str) -> Result<SubshiftModel> {
    let raw: RawModel = toml::from_str(text).map_err(|e| Error::Parse(format!("model file: {}", e.message())))?;
    if raw.schema != MODEL_SCHEMA {
        return Err(Error::Parse(format!("model schema {:?}, expected {MODEL_SCHEMA:?}", raw.schema)));
    }
    let m = || raw.m.ok_or_else(|| Error::Parse(format!("kind {:?} needs `m`", raw.kind)));
    let words = |ws: &[String], m: u16| ws.iter().map(|w| Word::parse(m, w)).collect::<Result<Vec<_>>>();
    match raw.kind.as_str() {
        "full" => SubshiftModel::full(m()?),
        "sft" => {
            let m = m()?;
            SubshiftModel::sft(m, words(&raw.forbidden, m)?)
        }
        "sgap" => {
            if raw.m.is_some_and(|m| m != 2) {
                return Err(Error::domain("S-gap shifts are binary"));
            }
            let s = raw.s.ok_or_else(|| Error::Parse("kind \"sgap\" needs an [S] table".into()))?;
            SubshiftModel::sgap(GapSet { finite: s.set.into_iter().collect(), min: s.min })
        }
        "coded" => {
            let m = m()?;
            SubshiftModel::coded(m, words(&raw.generators, m)?)
        }
        "interval" => {
            let map = raw.interval_map.ok_or_else(|| Error::Parse("kind \"interval\" needs [interval_map]".into()))?;
            let ab = AlphaBeta::new(Quad::parse(&map.alpha)?, Quad::parse(&map.beta)?)?;
            if raw.m.is_some_and(|m| m != ab.branches()) {
                return Err(Error::domain(format!("m must equal the branch count {}", ab.branches())));
            }
            Ok(SubshiftModel::interval(ab))
        }
        other => Err(Error::Parse(format!("unknown model kind {other:?}"))),
    }
}

pub fn load_model(path: &std::path::Path) -> Result<SubshiftModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}
