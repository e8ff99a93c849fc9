//! Test-only helpers shared across module tests.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::thread;

pub struct HttpReply {
    pub status: &'static str,
    pub body: String,
}

impl HttpReply {
    pub fn json(body: impl Into<String>) -> Self {
        HttpReply { status: "200 OK", body: body.into() }
    }

    pub fn status(status: &'static str, body: impl Into<String>) -> Self {
        HttpReply { status, body: body.into() }
    }
}

/// Serve the given replies to consecutive HTTP requests on a fresh local
/// port, one connection per request, then stop listening. Returns the base
/// URL. Every reply closes its connection so clients cannot pool.
pub fn serve_http(replies: Vec<HttpReply>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind test listener");
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for reply in replies {
            let (mut sock, _) = listener.accept().expect("accept test request");
            let mut buf = Vec::new();
            let mut tmp = [0u8; 1024];
            let (header_end, content_length) = loop {
                let n = sock.read(&mut tmp).expect("read test request");
                assert!(n > 0, "client hung up mid-request");
                buf.extend_from_slice(&tmp[..n]);
                if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                    let headers = String::from_utf8_lossy(&buf[..pos]).to_lowercase();
                    let len = headers
                        .lines()
                        .find_map(|l| l.strip_prefix("content-length:"))
                        .map(|v| v.trim().parse::<usize>().unwrap())
                        .unwrap_or(0);
                    break (pos + 4, len);
                }
            };
            while buf.len() < header_end + content_length {
                let n = sock.read(&mut tmp).expect("read test request body");
                assert!(n > 0, "client hung up mid-body");
                buf.extend_from_slice(&tmp[..n]);
            }
            let response = format!(
                "HTTP/1.1 {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                reply.status,
                reply.body.len(),
                reply.body
            );
            sock.write_all(response.as_bytes()).expect("write test response");
        }
    });
    format!("http://{addr}")
}
