//! Defaults file named by `XRK_CONFIG`.
//!
//! ```json
//! {"version": 1, "scene": "room.scene.json", "script": "ballpit",
//!  "options": "mock.options.json", "out": "last.log.json",
//!  "listen": 8787, "host": "127.0.0.1"}
//! ```
//!
//! Every key is optional; relative paths resolve against the file's own
//! directory. Command-line flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

pub const CONFIG_ENV: &str = "XRK_CONFIG";
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "current_version")]
    pub version: u32,
    pub scene: Option<PathBuf>,
    pub script: Option<String>,
    pub options: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub listen: Option<u16>,
    pub host: Option<String>,
}

fn current_version() -> u32 {
    CONFIG_VERSION
}

impl Defaults {
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => Self::load(Path::new(&path)),
            _ => Ok(Self::default()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("{CONFIG_ENV}: reading {}", path.display()))?;
        let mut d: Defaults =
            serde_json::from_str(&text).with_context(|| format!("{CONFIG_ENV}: parsing {}", path.display()))?;
        if d.version != CONFIG_VERSION {
            bail!(
                "{CONFIG_ENV}: unsupported version {} (supported: {CONFIG_VERSION})",
                d.version
            );
        }
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut d.scene, &mut d.options, &mut d.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(d)
    }
}
