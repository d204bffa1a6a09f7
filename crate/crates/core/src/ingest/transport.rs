//! Blocking HTTP GET abstraction so the EDGAR client can run against a fake.

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
    /// Parsed `Retry-After` header in seconds.
    pub retry_after: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError>;
}

#[cfg(feature = "remote")]
pub use http::ReqwestTransport;

#[cfg(feature = "remote")]
mod http {
    use std::time::Duration;

    use super::{HttpResponse, Transport, TransportError};

    pub struct ReqwestTransport {
        client: reqwest::blocking::Client,
    }

    impl ReqwestTransport {
        pub fn new(timeout: Duration) -> Result<Self, TransportError> {
            let client = reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .map_err(|e| TransportError(e.to_string()))?;
            Ok(Self { client })
        }
    }

    impl Transport for ReqwestTransport {
        fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError> {
            let resp = self
                .client
                .get(url)
                .header(reqwest::header::USER_AGENT, user_agent)
                .send()
                .map_err(|e| TransportError(e.to_string()))?;
            let status = resp.status().as_u16();
            let retry_after = resp
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse().ok());
            let body = resp.bytes().map_err(|e| TransportError(e.to_string()))?.to_vec();
            Ok(HttpResponse {
                status,
                body,
                retry_after,
            })
        }
    }
}
