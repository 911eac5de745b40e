//! Artifact envelopes: every output carries its schema, the tool version,
//! the seed and the full run configuration.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Profile,
    Tiling,
    Svg,
    Stats,
    Sharp,
    Audit,
    Csv,
}

pub const SCHEMAS: &[&str] = &[
    "tiler-profile/1",
    "tiler-tiling/1",
    "tiler-stats/1",
    "tiler-sharp/1",
    "tiler-audit/1",
];

#[derive(Clone, Debug)]
pub struct Artifact {
    pub kind: Kind,
    pub text: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub version: String,
    pub artifact: Kind,
    pub seed: u64,
    pub config: RunConfig,
}

fn header(schema: &str, kind: Kind, cfg: &RunConfig) -> Value {
    json!({
        "schema": schema,
        "version": VERSION,
        "artifact": kind,
        "seed": cfg.walk.seed,
        "config": cfg,
    })
}

pub fn json_artifact(schema: &str, kind: Kind, cfg: &RunConfig, data: Value) -> Artifact {
    let mut doc = header(schema, kind, cfg);
    doc["data"] = data;
    let mut text = serde_json::to_string_pretty(&doc).expect("documents serialize");
    text.push('\n');
    Artifact { kind, text }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
}

/// Inserts the header as `<metadata>` right after the opening tag.
pub fn svg_artifact(schema: &str, cfg: &RunConfig, svg: &str) -> Artifact {
    let meta = serde_json::to_string(&header(schema, Kind::Svg, cfg)).expect("headers serialize");
    let cut = svg.find('\n').map_or(svg.len(), |i| i + 1);
    let mut text = String::with_capacity(svg.len() + meta.len() + 32);
    text.push_str(&svg[..cut]);
    text.push_str("  <metadata>");
    text.push_str(&xml_escape(&meta));
    text.push_str("</metadata>\n");
    text.push_str(&svg[cut..]);
    Artifact {
        kind: Kind::Svg,
        text,
    }
}

/// CSV body preceded by a `#` line holding the header.
pub fn csv_artifact(schema: &str, cfg: &RunConfig, csv: &str) -> Artifact {
    let meta = serde_json::to_string(&header(schema, Kind::Csv, cfg)).expect("headers serialize");
    Artifact {
        kind: Kind::Csv,
        text: format!("# {meta}\n{csv}"),
    }
}

fn raw_header(text: &str) -> Result<Value> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).context("report is not valid JSON");
    }
    if trimmed.starts_with("<svg") {
        let start = text
            .find("<metadata>")
            .context("SVG has no metadata block")?
            + "<metadata>".len();
        let end = text[start..]
            .find("</metadata>")
            .context("SVG metadata block is not closed")?;
        return serde_json::from_str(&xml_unescape(&text[start..start + end]))
            .context("SVG metadata is not valid JSON");
    }
    if let Some(rest) = trimmed.strip_prefix("# ") {
        let line = rest.lines().next().unwrap_or("");
        return serde_json::from_str(line).context("CSV header line is not valid JSON");
    }
    bail!("not a tiler report: expected JSON, SVG or CSV")
}

/// Header of an emitted artifact, checked against this build.
pub fn read_header(text: &str) -> Result<Header> {
    let raw = raw_header(text)?;
    let schema = raw
        .get("schema")
        .and_then(Value::as_str)
        .context("report has no `schema` field")?;
    if !SCHEMAS.contains(&schema) {
        bail!("unsupported schema version `{schema}` (this build reads {})", SCHEMAS.join(", "));
    }
    let version = raw
        .get("version")
        .and_then(Value::as_str)
        .context("report has no `version` field")?;
    if version != VERSION {
        bail!("report was written by tiler {version}, this is tiler {VERSION}");
    }
    if raw.get("config").is_none_or(Value::is_null) {
        bail!("report has no `config` echo to reproduce from");
    }
    serde_json::from_value(raw).context("report `config` echo is malformed")
}
