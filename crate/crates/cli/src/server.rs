//! Line-protocol server. One engine task owns the session; connection
//! tasks only forward lines into it and relay its broadcasts.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use futures_util::{SinkExt, StreamExt};
use gridsite_core::persist::save_project_to_path;
use gridsite_core::protocol::{parse_inbound, Engine, Inbound};
use gridsite_core::session::SessionState;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot};
use tokio_tungstenite::tungstenite::Message;

type ClientId = u64;

enum Request {
    Register { client: ClientId, out: mpsc::UnboundedSender<String> },
    Unregister(ClientId),
    Line { client: ClientId, line: String },
    Snapshot(oneshot::Sender<Snapshot>),
}

/// Engine state plus every accepted inbound message in processing order.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: SessionState,
    pub log: Vec<Inbound>,
}

#[derive(Clone)]
pub struct ServerHandle {
    tx: mpsc::UnboundedSender<Request>,
    next_id: Arc<AtomicU64>,
}

/// A registered client: lines go in through `send`, everything the
/// engine addresses to it comes out of `incoming`.
pub struct ClientLink {
    pub id: ClientId,
    pub incoming: mpsc::UnboundedReceiver<String>,
    tx: mpsc::UnboundedSender<Request>,
}

impl ClientLink {
    pub fn send(&self, line: impl Into<String>) -> bool {
        self.tx.send(Request::Line { client: self.id, line: line.into() }).is_ok()
    }
}

impl Drop for ClientLink {
    fn drop(&mut self) {
        let _ = self.tx.send(Request::Unregister(self.id));
    }
}

impl ServerHandle {
    pub fn connect(&self) -> ClientLink {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let (out, incoming) = mpsc::unbounded_channel();
        let _ = self.tx.send(Request::Register { client: id, out });
        ClientLink { id, incoming, tx: self.tx.clone() }
    }

    pub async fn snapshot(&self) -> Option<Snapshot> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(Request::Snapshot(tx)).ok()?;
        rx.await.ok()
    }
}

/// Starts the engine task. With `project`, every accepted message is
/// followed by an atomic save.
pub fn spawn_engine(engine: Engine, project: Option<PathBuf>) -> ServerHandle {
    let (tx, rx) = mpsc::unbounded_channel();
    tokio::spawn(engine_loop(engine, project, rx));
    ServerHandle { tx, next_id: Arc::new(AtomicU64::new(1)) }
}

async fn engine_loop(mut engine: Engine, project: Option<PathBuf>, mut rx: mpsc::UnboundedReceiver<Request>) {
    let mut clients: BTreeMap<ClientId, mpsc::UnboundedSender<String>> = BTreeMap::new();
    let mut log = Vec::new();
    while let Some(req) = rx.recv().await {
        match req {
            Request::Register { client, out } => {
                let _ = out.send(engine.current_render().to_line());
                clients.insert(client, out);
            }
            Request::Unregister(client) => {
                clients.remove(&client);
            }
            Request::Snapshot(reply) => {
                let _ = reply.send(Snapshot { state: engine.state.clone(), log: log.clone() });
            }
            Request::Line { client, line } => match parse_inbound(&line) {
                Err(e) => {
                    if let Some(out) = clients.get(&client) {
                        let _ = out.send(e.to_outbound().to_line());
                    }
                }
                Ok(msg) => {
                    let outbound = engine.handle(&msg);
                    log.push(msg);
                    if let Some(path) = &project {
                        if let Err(e) = save_project_to_path(&engine.state, path) {
                            eprintln!("gridsite: saving {}: {e}", path.display());
                        }
                    }
                    for o in outbound {
                        let text = o.to_line();
                        clients.retain(|_, out| out.send(text.clone()).is_ok());
                    }
                }
            },
        }
    }
}

async fn serve_tcp_conn(stream: TcpStream, handle: ServerHandle) {
    let (read, mut write) = stream.into_split();
    let mut link = handle.connect();
    let writer = async {
        while let Some(line) = link.incoming.recv().await {
            if write.write_all(line.as_bytes()).await.is_err() || write.write_all(b"\n").await.is_err() {
                break;
            }
        }
    };
    let sender = link.tx.clone();
    let id = link.id;
    let reader = async move {
        let mut lines = BufReader::new(read).lines();
        while let Ok(Some(line)) = lines.next_line().await {
            if line.trim().is_empty() {
                continue;
            }
            if sender.send(Request::Line { client: id, line }).is_err() {
                break;
            }
        }
    };
    tokio::select! {
        _ = writer => {}
        _ = reader => {}
    }
}

pub async fn run_tcp(listener: TcpListener, handle: ServerHandle) -> std::io::Result<()> {
    loop {
        let (stream, _) = listener.accept().await?;
        tokio::spawn(serve_tcp_conn(stream, handle.clone()));
    }
}

async fn serve_ws_conn(stream: TcpStream, handle: ServerHandle) {
    let Ok(ws) = tokio_tungstenite::accept_async(stream).await else { return };
    let (mut sink, mut source) = ws.split();
    let mut link = handle.connect();
    let sender = link.tx.clone();
    let id = link.id;
    let writer = async {
        while let Some(line) = link.incoming.recv().await {
            if sink.send(Message::text(line)).await.is_err() {
                break;
            }
        }
    };
    let reader = async move {
        while let Some(Ok(msg)) = source.next().await {
            match msg {
                Message::Text(text) => {
                    if sender.send(Request::Line { client: id, line: text.to_string() }).is_err() {
                        break;
                    }
                }
                Message::Close(_) => break,
                _ => {}
            }
        }
    };
    tokio::select! {
        _ = writer => {}
        _ = reader => {}
    }
}

/// One JSON message per WebSocket text frame.
pub async fn run_ws(listener: TcpListener, handle: ServerHandle) -> std::io::Result<()> {
    loop {
        let (stream, _) = listener.accept().await?;
        tokio::spawn(serve_ws_conn(stream, handle.clone()));
    }
}
