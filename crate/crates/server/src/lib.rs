//! Interactive play sessions: free play and the 15 + 30 episode human
//! baseline protocol, served over a WebSocket and an equivalent HTTP endpoint.

pub mod http;
pub mod protocol;
pub mod session;

pub use http::{router, serve, serve_listener, ServeOptions};
pub use protocol::{ClientMessage, ErrorCode, Frame, Mode, Phase, ServerMessage, SCORED_EPISODES, WARMUP_EPISODES};
pub use session::{Session, SessionError, SessionManager, DEFAULT_IDLE_TIMEOUT};
