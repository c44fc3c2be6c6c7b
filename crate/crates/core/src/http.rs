//! Blocking HTTP POST shared by the remote OCR and LLM clients.

use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub(crate) enum HttpError {
    /// Nothing answered in time: timeouts, refused connections, DNS misses.
    #[error("{0}")]
    Unreachable(String),
    #[error("{0}")]
    Failure(String),
}

pub(crate) struct HttpReply {
    pub status: u16,
    pub body: String,
}

pub(crate) fn post(
    url: &str,
    content_type: &str,
    body: &[u8],
    timeout: Duration,
) -> Result<HttpReply, HttpError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let classify = |e: ureq::Error| match e {
        ureq::Error::Timeout(_)
        | ureq::Error::ConnectionFailed
        | ureq::Error::HostNotFound
        | ureq::Error::Io(_) => HttpError::Unreachable(format!("{url}: {e}")),
        other => HttpError::Failure(format!("{url}: {other}")),
    };
    let mut resp = agent
        .post(url)
        .header("Content-Type", content_type)
        .send(body)
        .map_err(classify)?;
    let status = resp.status().as_u16();
    let body = resp
        .body_mut()
        .with_config()
        .limit(64 * 1024 * 1024)
        .read_to_string()
        .map_err(classify)?;
    Ok(HttpReply { status, body })
}

#[cfg(test)]
pub(crate) mod mock {
    //! One-shot HTTP server on a loopback port for client tests.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread::JoinHandle;

    /// Serves a single request with `status` and `body`; the join handle
    /// yields the request body that was received.
    pub fn serve_once(status: u16, body: &str) -> (String, JoinHandle<Vec<u8>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let body = body.to_owned();
        let handle = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut req = vec![0; len];
            reader.read_exact(&mut req).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            req
        });
        (url, handle)
    }

    /// A loopback address with nothing listening.
    pub fn dead_url() -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        url
    }
}
