//! TCP transport: each connection is one session. Frames are a 4-byte
//! big-endian length followed by that many bytes of UTF-8 JSON.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use crate::session::{ErrorReply, Session};

pub const MAX_FRAME: u32 = 16 << 20;

pub enum Frame {
    Data(Vec<u8>),
    /// Longer than [`MAX_FRAME`]; the payload was skipped.
    Oversized(u32),
}

/// Reads one frame; `None` on a clean end of stream.
pub fn read_frame(r: &mut impl Read) -> io::Result<Option<Frame>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let n = u32::from_be_bytes(len);
    if n > MAX_FRAME {
        io::copy(&mut r.take(n as u64), &mut io::sink())?;
        return Ok(Some(Frame::Oversized(n)));
    }
    let mut buf = vec![0; n as usize];
    r.read_exact(&mut buf)?;
    Ok(Some(Frame::Data(buf)))
}

pub fn write_frame(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let n = u32::try_from(payload.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too long"))?;
    w.write_all(&n.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

/// Serves one connection until the peer closes it.
pub fn handle_connection(mut stream: TcpStream) -> io::Result<()> {
    let mut session = Session::new();
    while let Some(frame) = read_frame(&mut stream)? {
        let reply = match frame {
            Frame::Data(bytes) => session.handle_bytes(&bytes),
            Frame::Oversized(n) => serde_json::to_value(ErrorReply {
                error: format!("frame of {n} bytes exceeds the {MAX_FRAME}-byte limit"),
                revision: session.revision(),
            })
            .expect("serializable"),
        };
        write_frame(&mut stream, reply.to_string().as_bytes())?;
    }
    Ok(())
}

/// Accepts connections forever, one thread each.
pub fn serve(listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            let _ = handle_connection(stream);
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_round_trip() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"{}").unwrap();
        assert_eq!(buf, [0, 0, 0, 2, b'{', b'}']);
        let mut r = &buf[..];
        assert!(matches!(read_frame(&mut r).unwrap(), Some(Frame::Data(d)) if d == b"{}"));
        assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn truncated_frame_is_an_error() {
        let mut r: &[u8] = &[0, 0, 0, 9, b'{'];
        assert!(read_frame(&mut r).is_err());
    }
}
