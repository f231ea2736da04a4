use std::io::{ErrorKind, Read, Write};
use std::net::{Shutdown, TcpStream};
use std::time::{Duration, Instant};

use tungstenite::handshake::server::{ErrorResponse, Request, Response};
use tungstenite::{Message, WebSocket};

use super::{BridgeError, BridgeMessage, SESSION_PATH};

pub const MAX_FRAME_BYTES: usize = 16 << 20;

/// Writes one length-prefixed document.
pub fn write_frame<W: Write>(out: &mut W, body: &[u8]) -> Result<(), BridgeError> {
    let len = u32::try_from(body.len())
        .ok()
        .filter(|n| *n as usize <= MAX_FRAME_BYTES)
        .ok_or_else(|| BridgeError::Frame(format!("{} bytes exceeds the frame limit", body.len())))?;
    out.write_all(&len.to_be_bytes())?;
    out.write_all(body)?;
    out.flush()?;
    Ok(())
}

/// Reads one length-prefixed document; `None` on a clean end of stream.
pub fn read_frame<R: Read>(input: &mut R) -> Result<Option<Vec<u8>>, BridgeError> {
    let mut header = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match input.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(BridgeError::Frame("stream ended inside a length prefix".into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(BridgeError::Frame(format!(
            "declared length {len} exceeds the frame limit"
        )));
    }
    let mut body = vec![0u8; len];
    input
        .read_exact(&mut body)
        .map_err(|e| BridgeError::Frame(format!("stream ended inside a {len}-byte body: {e}")))?;
    Ok(Some(body))
}

fn frame_bytes(body: &[u8]) -> Result<Vec<u8>, BridgeError> {
    let mut out = Vec::with_capacity(body.len() + 4);
    write_frame(&mut out, body)?;
    Ok(out)
}

fn ws_error(e: tungstenite::Error) -> BridgeError {
    match e {
        tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed => BridgeError::Closed,
        tungstenite::Error::Io(e) => BridgeError::Io(e.to_string()),
        other => BridgeError::WebSocket(other.to_string()),
    }
}

/// One duplex connection carrying framed messages.
pub enum Transport {
    Tcp(TcpStream),
    WebSocket(Box<WebSocket<TcpStream>>),
}

impl std::fmt::Debug for Transport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Transport::Tcp(_) => f.write_str("Transport::Tcp"),
            Transport::WebSocket(_) => f.write_str("Transport::WebSocket"),
        }
    }
}

impl Transport {
    /// Server side: sniffs for an HTTP upgrade (`GET `) and otherwise treats
    /// the stream as raw framed TCP.
    // The handshake callback's error type is fixed by tungstenite.
    #[allow(clippy::result_large_err)]
    pub fn accept(stream: TcpStream) -> Result<Self, BridgeError> {
        stream.set_nodelay(true)?;
        if !starts_with_get(&stream)? {
            return Ok(Transport::Tcp(stream));
        }
        let check_path = |req: &Request, resp: Response| -> Result<Response, ErrorResponse> {
            if req.uri().path() == SESSION_PATH {
                Ok(resp)
            } else {
                let mut err = ErrorResponse::new(Some(format!("no endpoint at {}", req.uri().path())));
                *err.status_mut() = tungstenite::http::StatusCode::NOT_FOUND;
                Err(err)
            }
        };
        let ws = tungstenite::accept_hdr(stream, check_path).map_err(|e| BridgeError::WebSocket(e.to_string()))?;
        Ok(Transport::WebSocket(Box::new(ws)))
    }

    pub fn connect_tcp(addr: impl std::net::ToSocketAddrs) -> Result<Self, BridgeError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Transport::Tcp(stream))
    }

    /// Client side WebSocket to `ws://addr/session`.
    pub fn connect_ws(addr: std::net::SocketAddr) -> Result<Self, BridgeError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let url = format!("ws://{addr}{SESSION_PATH}");
        let (ws, _) = tungstenite::client(url.as_str(), stream).map_err(|e| BridgeError::WebSocket(e.to_string()))?;
        Ok(Transport::WebSocket(Box::new(ws)))
    }

    pub fn set_read_timeout(&self, timeout: Option<Duration>) -> Result<(), BridgeError> {
        let stream = match self {
            Transport::Tcp(s) => s,
            Transport::WebSocket(ws) => ws.get_ref(),
        };
        stream.set_read_timeout(timeout)?;
        Ok(())
    }

    pub fn send(&mut self, message: &BridgeMessage) -> Result<(), BridgeError> {
        let body = message.to_bytes();
        match self {
            Transport::Tcp(s) => write_frame(s, &body),
            Transport::WebSocket(ws) => ws.send(Message::binary(frame_bytes(&body)?)).map_err(ws_error),
        }
    }

    /// Next message, or `None` once the peer has closed.
    pub fn recv(&mut self) -> Result<Option<BridgeMessage>, BridgeError> {
        match self {
            Transport::Tcp(s) => match read_frame(s)? {
                None => Ok(None),
                Some(body) => BridgeMessage::from_bytes(&body).map(Some),
            },
            Transport::WebSocket(ws) => loop {
                let message = match ws.read() {
                    Ok(m) => m,
                    Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(None),
                    Err(e) => return Err(ws_error(e)),
                };
                match message {
                    Message::Binary(bytes) => {
                        let mut cursor = &bytes[..];
                        let body =
                            read_frame(&mut cursor)?.ok_or_else(|| BridgeError::Frame("empty binary frame".into()))?;
                        if !cursor.is_empty() {
                            return Err(BridgeError::Frame("trailing bytes after framed document".into()));
                        }
                        return BridgeMessage::from_bytes(&body).map(Some);
                    }
                    Message::Text(text) => return BridgeMessage::from_bytes(text.as_bytes()).map(Some),
                    Message::Close(_) => return Ok(None),
                    Message::Ping(_) | Message::Pong(_) | Message::Frame(_) => continue,
                }
            },
        }
    }

    pub fn close(&mut self) {
        match self {
            Transport::Tcp(s) => {
                let _ = s.shutdown(Shutdown::Both);
            }
            Transport::WebSocket(ws) => {
                let _ = ws.close(None);
                let _ = ws.flush();
                let _ = ws.get_ref().shutdown(Shutdown::Both);
            }
        }
    }
}

/// Waits briefly for the first four bytes without consuming them.
fn starts_with_get(stream: &TcpStream) -> Result<bool, BridgeError> {
    let deadline = Instant::now() + Duration::from_secs(5);
    stream.set_read_timeout(Some(Duration::from_millis(50)))?;
    let mut buf = [0u8; 4];
    let result = loop {
        match stream.peek(&mut buf) {
            Ok(0) => break Ok(false),
            Ok(n) if n >= 4 => break Ok(&buf == b"GET "),
            Ok(n) if buf[..n] != b"GET "[..n] => break Ok(false),
            Ok(_) => {}
            Err(e)
                if matches!(
                    e.kind(),
                    ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted
                ) => {}
            Err(e) => break Err(e.into()),
        }
        if Instant::now() >= deadline {
            break Ok(false);
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    stream.set_read_timeout(None)?;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip_and_truncation() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"{\"a\":1}").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 7]);
        let mut cursor = &buf[..];
        assert_eq!(read_frame(&mut cursor).unwrap().unwrap(), b"{\"a\":1}");
        assert_eq!(read_frame(&mut cursor).unwrap(), None);
        let mut short = &buf[..6];
        assert!(matches!(read_frame(&mut short), Err(BridgeError::Frame(_))));
        let mut huge = &[0xff, 0xff, 0xff, 0xff][..];
        assert!(matches!(read_frame(&mut huge), Err(BridgeError::Frame(_))));
    }
}
