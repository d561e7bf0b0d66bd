//! Wire adapter for external embedders: newline-delimited JSON over TCP.
//!
//! Protocol, one JSON object per line, one response per request:
//!   -> {"op":"hello"}
//!   <- {"id":"<provider id>","dimension":<n>}
//!   -> {"op":"embed","text":"<document>"}
//!   <- {"vector":[...]} | {"error":"<reason>"}
//!
//! One connection serves many requests; the adapter reconnects per call if
//! the peer closed. `serve_embedder` runs the server side over any local
//! provider, which is also how the tests exercise the adapter.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Mutex;
use std::time::Duration;

use crate::retrieval::embed::{EmbeddingProvider, ProviderError};

const IO_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum Request {
    Hello,
    Embed { text: String },
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum Response {
    Hello { id: String, dimension: usize },
    Vector { vector: Vec<f64> },
    Error { error: String },
}

/// Client side: an `EmbeddingProvider` backed by a remote peer.
pub struct WireEmbeddingProvider {
    endpoint: String,
    id: String,
    dimension: usize,
    conn: Mutex<Option<BufReader<TcpStream>>>,
}

impl std::fmt::Debug for WireEmbeddingProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WireEmbeddingProvider")
            .field("endpoint", &self.endpoint)
            .field("id", &self.id)
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

impl WireEmbeddingProvider {
    /// Connect and handshake; fails fast when the peer is unreachable or
    /// answers garbage.
    pub fn connect(endpoint: &str) -> Result<Self, ProviderError> {
        let mut conn = open(endpoint)?;
        let response = roundtrip(&mut conn, &Request::Hello)?;
        match response {
            Response::Hello { id, dimension } => Ok(WireEmbeddingProvider {
                endpoint: endpoint.to_string(),
                id,
                dimension,
                conn: Mutex::new(Some(conn)),
            }),
            Response::Error { error } => Err(ProviderError::Malformed(error)),
            Response::Vector { .. } => Err(ProviderError::Malformed(
                "hello answered with a vector".to_string(),
            )),
        }
    }
}

fn open(endpoint: &str) -> Result<BufReader<TcpStream>, ProviderError> {
    let stream =
        TcpStream::connect(endpoint).map_err(|e| ProviderError::Transport(e.to_string()))?;
    stream
        .set_read_timeout(Some(IO_TIMEOUT))
        .and_then(|_| stream.set_write_timeout(Some(IO_TIMEOUT)))
        .map_err(|e| ProviderError::Transport(e.to_string()))?;
    Ok(BufReader::new(stream))
}

fn roundtrip(conn: &mut BufReader<TcpStream>, request: &Request) -> Result<Response, ProviderError> {
    let mut line = serde_json::to_string(request).expect("request serializes");
    line.push('\n');
    conn.get_mut()
        .write_all(line.as_bytes())
        .map_err(|e| ProviderError::Transport(e.to_string()))?;
    let mut reply = String::new();
    let n = conn
        .read_line(&mut reply)
        .map_err(|e| ProviderError::Transport(e.to_string()))?;
    if n == 0 {
        return Err(ProviderError::Transport("peer closed the connection".to_string()));
    }
    serde_json::from_str(reply.trim_end()).map_err(|e| ProviderError::Malformed(e.to_string()))
}

impl EmbeddingProvider for WireEmbeddingProvider {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut guard = self.conn.lock().expect("wire connection lock");
        if guard.is_none() {
            *guard = Some(open(&self.endpoint)?);
        }
        let conn = guard.as_mut().expect("connection just ensured");
        let request = Request::Embed { text: text.to_string() };
        let response = match roundtrip(conn, &request) {
            Ok(r) => r,
            Err(ProviderError::Transport(_)) => {
                // One reconnect attempt per call covers a peer that closed
                // an idle connection.
                *guard = Some(open(&self.endpoint)?);
                roundtrip(guard.as_mut().unwrap(), &request)?
            }
            Err(e) => return Err(e),
        };
        match response {
            Response::Vector { vector } => {
                if vector.len() != self.dimension {
                    return Err(ProviderError::DimensionMismatch {
                        expected: self.dimension,
                        got: vector.len(),
                    });
                }
                Ok(vector)
            }
            Response::Error { error } => Err(ProviderError::Malformed(error)),
            Response::Hello { .. } => Err(ProviderError::Malformed(
                "embed answered with a handshake".to_string(),
            )),
        }
    }
}

/// Server side: answer wire requests with a local provider until the
/// listener errors or `max_connections` peers have disconnected. Returns
/// the number of requests served.
pub fn serve_embedder(
    listener: TcpListener,
    provider: &dyn EmbeddingProvider,
    max_connections: usize,
) -> std::io::Result<usize> {
    let mut served = 0;
    for _ in 0..max_connections {
        let (stream, _) = listener.accept()?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut stream = stream;
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            let response = match serde_json::from_str::<Request>(line.trim_end()) {
                Ok(Request::Hello) => Response::Hello {
                    id: provider.id(),
                    dimension: provider.dimension(),
                },
                Ok(Request::Embed { text }) => match provider.embed(&text) {
                    Ok(vector) => Response::Vector { vector },
                    Err(e) => Response::Error { error: e.to_string() },
                },
                Err(e) => Response::Error { error: format!("bad request: {e}") },
            };
            let mut reply = serde_json::to_string(&response).expect("response serializes");
            reply.push('\n');
            stream.write_all(reply.as_bytes())?;
            served += 1;
        }
    }
    Ok(served)
}
