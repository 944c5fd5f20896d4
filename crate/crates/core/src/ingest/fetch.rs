//! Minimal client for a web-archive snapshot service.
//!
//! Two URL templates drive it. The listing template returns capture timestamps
//! for a page, either as CDX JSON (an array of rows whose first row is a
//! header containing `timestamp`) or as plain CDX text lines. The image
//! template is then requested once per timestamp and must answer with a PNG;
//! anything else is skipped. Placeholders: `{url}`, `{count}`, `{timestamp}`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::IngestError;

#[derive(Debug, Clone)]
pub struct ArchiveClient {
    pub list_template: String,
    pub image_template: String,
    pub timeout: Duration,
}

impl Default for ArchiveClient {
    fn default() -> Self {
        ArchiveClient {
            list_template:
                "http://web.archive.org/cdx/search/cdx?url={url}&output=json&limit={count}&filter=statuscode:200"
                    .into(),
            image_template: "http://web.archive.org/web/{timestamp}im_/{url}".into(),
            timeout: Duration::from_secs(30),
        }
    }
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

impl ArchiveClient {
    fn agent(&self) -> ureq::Agent {
        ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into()
    }

    /// Capture timestamps for `url`, at most `count`.
    pub fn list(&self, url: &str, count: usize) -> Result<Vec<String>, IngestError> {
        let endpoint = self
            .list_template
            .replace("{url}", url)
            .replace("{count}", &count.to_string());
        let body = self
            .agent()
            .get(&endpoint)
            .call()
            .map_err(|e| IngestError::Network(e.to_string()))?
            .body_mut()
            .read_to_string()
            .map_err(|e| IngestError::Network(e.to_string()))?;
        let mut stamps = parse_listing(&body);
        stamps.truncate(count);
        Ok(stamps)
    }

    pub fn fetch(
        &self,
        url: &str,
        count: usize,
        out_directory: &Path,
    ) -> Result<Vec<PathBuf>, IngestError> {
        let stamps = self.list(url, count)?;
        if stamps.is_empty() {
            return Err(IngestError::NoSnapshotsFound(url.to_string()));
        }
        std::fs::create_dir_all(out_directory)?;
        let agent = self.agent();
        let mut written = Vec::new();
        for stamp in &stamps {
            let endpoint = self
                .image_template
                .replace("{url}", url)
                .replace("{timestamp}", stamp);
            let bytes = match agent.get(&endpoint).call() {
                Ok(mut resp) => match resp.body_mut().read_to_vec() {
                    Ok(b) => b,
                    Err(e) => {
                        log::warn!("snapshot {stamp}: {e}");
                        continue;
                    }
                },
                Err(e) => {
                    log::warn!("snapshot {stamp}: {e}");
                    continue;
                }
            };
            if !bytes.starts_with(PNG_MAGIC) {
                log::warn!("snapshot {stamp} is not a PNG, skipped");
                continue;
            }
            let path = out_directory.join(format!("{:03}_{stamp}.png", written.len()));
            std::fs::write(&path, &bytes)?;
            written.push(path);
        }
        if written.is_empty() {
            return Err(IngestError::NoSnapshotsFound(url.to_string()));
        }
        Ok(written)
    }
}

/// Fetches up to `count` snapshots of `url` with the default archive endpoints.
pub fn fetch_snapshots(
    url: &str,
    count: usize,
    out_directory: &Path,
) -> Result<Vec<PathBuf>, IngestError> {
    ArchiveClient::default().fetch(url, count, out_directory)
}

fn parse_listing(body: &str) -> Vec<String> {
    if let Ok(serde_json::Value::Array(rows)) = serde_json::from_str::<serde_json::Value>(body) {
        let mut rows = rows.into_iter();
        let Some(header) = rows.next() else {
            return Vec::new();
        };
        let col = header
            .as_array()
            .and_then(|h| h.iter().position(|v| v.as_str() == Some("timestamp")))
            .unwrap_or(1);
        return rows
            .filter_map(|row| row.get(col).and_then(|v| v.as_str()).map(str::to_string))
            .collect();
    }
    body.lines()
        .filter_map(|line| line.split_whitespace().nth(1))
        .filter(|t| t.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_string)
        .collect()
}
