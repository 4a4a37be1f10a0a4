//! Transport. `POST /api/message` takes one client message and answers with a
//! JSON array of server messages. `GET /ws` upgrades to a WebSocket where each
//! text frame carries one client message and the replies arrive as separate
//! text frames, in order. Static assets, when configured, are served from `/`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use crate::protocol::ServerMessage;
use crate::session::{SessionManager, DEFAULT_IDLE_TIMEOUT};

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub addr: SocketAddr,
    /// Directory of static client assets.
    pub assets: Option<PathBuf>,
    pub idle_timeout: Duration,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { addr: SocketAddr::from(([127, 0, 0, 1], 8080)), assets: None, idle_timeout: DEFAULT_IDLE_TIMEOUT }
    }
}

pub fn router(manager: Arc<SessionManager>, assets: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/api/message", post(message))
        .route("/ws", get(upgrade))
        .with_state(manager);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

async fn message(State(manager): State<Arc<SessionManager>>, body: String) -> Json<Vec<ServerMessage>> {
    Json(manager.handle_text(&body))
}

async fn upgrade(State(manager): State<Arc<SessionManager>>, ws: WebSocketUpgrade) -> impl IntoResponse {
    ws.on_upgrade(move |socket| socket_loop(socket, manager))
}

async fn socket_loop(socket: WebSocket, manager: Arc<SessionManager>) {
    let (mut tx, mut rx) = socket.split();
    while let Some(Ok(msg)) = rx.next().await {
        let replies = match msg {
            Message::Text(text) => manager.handle_text(text.as_str()),
            Message::Binary(bytes) => manager.handle_text(&String::from_utf8_lossy(&bytes)),
            Message::Close(_) => break,
            _ => continue,
        };
        for reply in replies {
            let text = serde_json::to_string(&reply).expect("server messages serialise");
            if tx.send(Message::Text(text.into())).await.is_err() {
                return;
            }
        }
    }
}

/// Serves on an already bound listener until the task is cancelled.
pub async fn serve_listener(
    listener: TcpListener,
    manager: Arc<SessionManager>,
    assets: Option<PathBuf>,
) -> std::io::Result<()> {
    let sweeper = Arc::clone(&manager);
    let period = (manager.idle_timeout() / 2).clamp(Duration::from_millis(100), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let dropped = sweeper.expire_idle(Instant::now());
            if dropped > 0 {
                tracing::info!(dropped, "expired idle sessions");
            }
        }
    });
    axum::serve(listener, router(manager, assets)).await
}

pub async fn serve(options: ServeOptions) -> std::io::Result<()> {
    let listener = TcpListener::bind(options.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_listener(listener, Arc::new(SessionManager::new(options.idle_timeout)), options.assets).await
}
