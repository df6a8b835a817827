//! TOML configuration shared by the CLI and the service.

use std::path::{Path, PathBuf};

use klamp_core::ingest::IngestConfig;
use klamp_core::retrieval::RetrievalConfig;
use klamp_core::suggest::GenerationParams;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const ENV_CHAT_ENDPOINT: &str = "KLAMP_CHAT_ENDPOINT";
pub const ENV_EMBED_ENDPOINT: &str = "KLAMP_EMBED_ENDPOINT";
pub const ENV_SEED: &str = "KLAMP_SEED";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    #[default]
    Fallback,
    Remote,
}

/// File locations. Relative paths are resolved against the config file's
/// directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub events: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub allowlist: Option<PathBuf>,
    pub search_corpus: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub store_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            events: None,
            gazetteer: None,
            allowlist: None,
            search_corpus: None,
            templates: None,
            store_dir: PathBuf::from("state"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub generator: GeneratorKind,
    pub embedder: EmbedderKind,
    pub chat_endpoint: Option<String>,
    pub embed_endpoint: Option<String>,
    pub embed_dim: usize,
    pub timeout_seconds: u64,
    /// Extra attempts after the first failed call.
    pub max_retries: u32,
    pub max_in_flight: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            generator: GeneratorKind::Mock,
            embedder: EmbedderKind::Fallback,
            chat_endpoint: None,
            embed_endpoint: None,
            embed_dim: klamp_core::embed::DEFAULT_DIM,
            timeout_seconds: 30,
            max_retries: 2,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen_address: String,
    /// Events between store snapshots, per user.
    pub snapshot_every: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen_address: "127.0.0.1:8080".into(),
            snapshot_every: 100,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub server: ServerConfig,
    pub paths: PathsConfig,
    pub ingest: IngestConfig,
    pub retrieval: RetrievalConfig,
    pub generation: GenerationParams,
    pub backends: BackendConfig,
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads, resolves paths, applies environment overrides and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&crate::io::read_text(path)?)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        for path in [
            &mut p.events,
            &mut p.gazetteer,
            &mut p.allowlist,
            &mut p.search_corpus,
            &mut p.templates,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if p.store_dir.is_relative() {
            p.store_dir = base.join(&p.store_dir);
        }
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(v) = get(ENV_CHAT_ENDPOINT) {
            self.backends.chat_endpoint = Some(v);
        }
        if let Some(v) = get(ENV_EMBED_ENDPOINT) {
            self.backends.embed_endpoint = Some(v);
        }
        if let Some(v) = get(ENV_SEED) {
            self.retrieval.rng_seed = v.trim().parse().map_err(|_| {
                Error::Config(format!("{ENV_SEED} is not an unsigned integer: {v:?}"))
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.ingest.validate()?;
        self.retrieval.validate()?;
        self.generation.validate()?;
        let p = &self.paths;
        for (name, path) in [
            ("events", &p.events),
            ("gazetteer", &p.gazetteer),
            ("allowlist", &p.allowlist),
            ("search_corpus", &p.search_corpus),
            ("templates", &p.templates),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "paths.{name}: {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        let b = &self.backends;
        if b.generator == GeneratorKind::Remote && b.chat_endpoint.is_none() {
            return Err(Error::Config(
                "remote generator needs backends.chat_endpoint".into(),
            ));
        }
        if b.embedder == EmbedderKind::Remote && b.embed_endpoint.is_none() {
            return Err(Error::Config(
                "remote embedder needs backends.embed_endpoint".into(),
            ));
        }
        if b.max_in_flight == 0 || b.embed_dim == 0 {
            return Err(Error::Config(
                "max_in_flight and embed_dim must be positive".into(),
            ));
        }
        if self.server.snapshot_every == 0 {
            return Err(Error::Config(
                "server.snapshot_every must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Ingest settings with the allowlist file, if any, merged in.
    pub fn ingest_config(&self) -> Result<IngestConfig> {
        let mut cfg = self.ingest.clone();
        if let Some(path) = &self.paths.allowlist {
            let mut set = cfg.domain_allowlist.take().unwrap_or_default();
            set.extend(crate::io::load_allowlist(path)?);
            cfg.domain_allowlist = Some(set);
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_file() {
        let cfg = ServiceConfig::from_toml("").unwrap();
        assert_eq!(cfg, ServiceConfig::default());
        assert_eq!(cfg.ingest.min_visitations, 100);
        assert_eq!(cfg.generation.temperature, 0.7);
        assert_eq!(cfg.retrieval.sample_size, 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn parses_sections() {
        let cfg = ServiceConfig::from_toml(
            r#"
            [server]
            listen_address = "0.0.0.0:9000"
            [ingest]
            min_visitations = 3
            k_anonymity_threshold = 2
            [retrieval]
            rng_seed = 42
            [backends]
            generator = "remote"
            chat_endpoint = "http://localhost:1/chat"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.server.listen_address, "0.0.0.0:9000");
        assert_eq!(cfg.ingest.min_visitations, 3);
        assert_eq!(cfg.ingest.session_gap_seconds, 1800);
        assert_eq!(cfg.retrieval.rng_seed, 42);
        assert_eq!(cfg.backends.generator, GeneratorKind::Remote);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ServiceConfig::from_toml("[ingest]\nmin_visits = 3\n").is_err());
        let cfg = ServiceConfig::from_toml("[backends]\ngenerator = \"remote\"\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = ServiceConfig::from_toml("[generation]\ntop_p = 0.0\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn env_overrides() {
        let mut cfg = ServiceConfig::default();
        cfg.apply_env(|k| match k {
            ENV_CHAT_ENDPOINT => Some("http://chat".into()),
            ENV_SEED => Some("17".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.backends.chat_endpoint.as_deref(), Some("http://chat"));
        assert_eq!(cfg.backends.embed_endpoint, None);
        assert_eq!(cfg.retrieval.rng_seed, 17);
        assert!(cfg
            .apply_env(|k| (k == ENV_SEED).then(|| "x".into()))
            .is_err());
    }

    #[test]
    fn relative_paths_follow_config_dir() {
        let mut cfg = ServiceConfig::from_toml(
            "[paths]\ngazetteer = \"g.tsv\"\nstore_dir = \"/abs/state\"\n",
        )
        .unwrap();
        cfg.resolve_paths(Path::new("/etc/klamp"));
        assert_eq!(cfg.paths.gazetteer.unwrap(), Path::new("/etc/klamp/g.tsv"));
        assert_eq!(cfg.paths.store_dir, Path::new("/abs/state"));
    }
}
