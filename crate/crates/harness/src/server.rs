//! Transports for the wire protocol: stdio and HTTP POST, both carrying
//! newline-delimited JSON frames.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::post;
use axum::Router;
use serde::{Deserialize, Serialize};
use tokio::io::{AsyncBufReadExt, AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt, BufReader};

use crate::protocol::{Response, SessionDefaults, SessionManager};

/// Longest accepted frame; longer lines are answered with an error frame.
pub const MAX_FRAME_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServeConfig {
    /// `stdio`, or a socket address such as `127.0.0.1:8700`.
    pub bind: String,
    #[serde(flatten)]
    pub defaults: SessionDefaults,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            bind: "stdio".into(),
            defaults: SessionDefaults::default(),
        }
    }
}

async fn handle_blocking(mgr: &Arc<SessionManager>, frame: Vec<u8>) -> Response {
    let mgr = Arc::clone(mgr);
    // Verdicts may run thousands of MCTS simulations; keep them off the reactor.
    tokio::task::spawn_blocking(move || mgr.handle_bytes(&frame))
        .await
        .unwrap_or_else(|e| Response::Error {
            code: crate::protocol::ErrorCode::Internal,
            message: format!("worker failed: {e}"),
            session: None,
        })
}

fn spawn_sweeper(mgr: &Arc<SessionManager>) {
    let mgr = Arc::clone(mgr);
    let period = Duration::from_secs(mgr.defaults().idle_timeout_secs.clamp(1, 30));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let n = mgr.sweep();
            if n > 0 {
                log::info!("expired {n} idle session(s)");
            }
        }
    });
}

/// Answers each input line with one output line until EOF.
pub async fn serve_stream<R, W>(mgr: Arc<SessionManager>, input: R, mut output: W) -> std::io::Result<()>
where
    R: AsyncRead + Unpin,
    W: AsyncWrite + Unpin,
{
    let mut reader = BufReader::new(input);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = (&mut reader).take(MAX_FRAME_BYTES as u64 + 1).read_until(b'\n', &mut buf).await?;
        if n == 0 {
            break;
        }
        let too_long = buf.len() > MAX_FRAME_BYTES && buf.last() != Some(&b'\n');
        let resp = if too_long {
            // Discard the rest of the oversized line.
            let mut rest = Vec::new();
            reader.read_until(b'\n', &mut rest).await?;
            Response::Error {
                code: crate::protocol::ErrorCode::BadRequest,
                message: format!("frame exceeds {MAX_FRAME_BYTES} bytes"),
                session: None,
            }
        } else {
            let frame = buf.trim_ascii();
            if frame.is_empty() {
                continue;
            }
            handle_blocking(&mgr, frame.to_vec()).await
        };
        output.write_all(resp.to_line().as_bytes()).await?;
        output.flush().await?;
    }
    Ok(())
}

async fn post_frames(State(mgr): State<Arc<SessionManager>>, body: axum::body::Bytes) -> impl IntoResponse {
    let mut out = String::new();
    for line in body.split(|&b| b == b'\n') {
        let line = line.trim_ascii();
        if !line.is_empty() {
            out.push_str(&handle_blocking(&mgr, line.to_vec()).await.to_line());
        }
    }
    ([(header::CONTENT_TYPE, "application/x-ndjson")], out)
}

/// HTTP transport: `POST /` (or `/v1/frames`) with one or more NDJSON request
/// frames; the body of the reply holds one response frame per request.
pub fn router(mgr: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/", post(post_frames))
        .route("/v1/frames", post(post_frames))
        .layer(axum::extract::DefaultBodyLimit::max(MAX_FRAME_BYTES))
        .with_state(mgr)
}

pub async fn serve(cfg: ServeConfig) -> anyhow::Result<()> {
    let mgr = Arc::new(SessionManager::new(cfg.defaults.clone()));
    spawn_sweeper(&mgr);
    if cfg.bind == "stdio" {
        log::info!("serving on stdio");
        serve_stream(mgr, tokio::io::stdin(), tokio::io::stdout()).await?;
    } else {
        let listener = tokio::net::TcpListener::bind(&cfg.bind).await?;
        log::info!("serving on http://{}", listener.local_addr()?);
        axum::serve(listener, router(mgr))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
    }
    Ok(())
}
