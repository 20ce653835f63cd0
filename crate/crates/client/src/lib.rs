//! Typed HTTP client for the search service.

use mias_core::api::{ApiError, DocumentView, Health, SearchResponse};
use reqwest::{StatusCode, Url};
use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("invalid service URL {0:?}")]
    InvalidUrl(String),
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error("service answered {status}: {}", .body.error)]
    Api { status: StatusCode, body: ApiError },
}

impl ClientError {
    /// The API error body, if the service rejected the request.
    pub fn api_error(&self) -> Option<(StatusCode, &ApiError)> {
        match self {
            ClientError::Api { status, body } => Some((*status, body)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MiasClient {
    base: Url,
    http: reqwest::Client,
}

impl MiasClient {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let mut base = Url::parse(base).map_err(|_| ClientError::InvalidUrl(base.to_string()))?;
        if base.cannot_be_a_base() || !matches!(base.scheme(), "http" | "https") {
            return Err(ClientError::InvalidUrl(base.to_string()));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(MiasClient { base, http: reqwest::Client::new() })
    }

    fn url(&self, segments: &[&str]) -> Url {
        let mut url = self.base.clone();
        url.path_segments_mut().expect("checked in new").pop_if_empty().extend(segments);
        url
    }

    async fn decode<T: DeserializeOwned>(response: reqwest::Response) -> Result<T, ClientError> {
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        let bytes = response.bytes().await?;
        let body = serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| ApiError { error: String::from_utf8_lossy(&bytes).into_owned(), position: None });
        Err(ClientError::Api { status, body })
    }

    pub async fn search(&self, q: &str, limit: Option<usize>) -> Result<SearchResponse, ClientError> {
        let mut request = self.http.get(self.url(&["api", "search"])).query(&[("q", q)]);
        if let Some(limit) = limit {
            request = request.query(&[("limit", limit)]);
        }
        Self::decode(request.send().await?).await
    }

    /// `Ok(None)` for an unknown id.
    pub async fn doc(&self, id: &str) -> Result<Option<DocumentView>, ClientError> {
        let response = self.http.get(self.url(&["api", "doc", id])).send().await?;
        if response.status() == StatusCode::NOT_FOUND {
            return Ok(None);
        }
        Self::decode(response).await.map(Some)
    }

    /// Reports loading services as `status: "loading"` rather than an error.
    pub async fn health(&self) -> Result<Health, ClientError> {
        let response = self.http.get(self.url(&["healthz"])).send().await?;
        if response.status() == StatusCode::SERVICE_UNAVAILABLE {
            return Ok(response.json().await?);
        }
        Self::decode(response).await
    }
}
