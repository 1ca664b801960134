use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Instant;

use super::SmtError;

/// A running solver process with a line-oriented reader thread.
pub(super) struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

pub(super) enum Reply {
    Line(String),
    Timeout,
    Closed,
}

impl Process {
    pub fn spawn(path: &std::path::Path, args: &[String]) -> Result<Process, SmtError> {
        let mut child = Command::new(path)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SmtError::Spawn(format!("{}: {e}", path.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Process { child, stdin, lines: rx })
    }

    pub fn send(&mut self, text: &str) -> Result<(), SmtError> {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SmtError::Crashed(e.to_string()))
    }

    /// Read one complete s-expression or bare token, possibly spanning lines.
    pub fn read_response(&mut self, deadline: Instant) -> Reply {
        let mut buf = String::new();
        let mut depth: i64 = 0;
        loop {
            let now = Instant::now();
            if now >= deadline {
                return Reply::Timeout;
            }
            match self.lines.recv_timeout(deadline - now) {
                Ok(line) => {
                    let trimmed = line.trim();
                    if trimmed.is_empty() && buf.is_empty() {
                        continue;
                    }
                    depth += paren_balance(trimmed);
                    if !buf.is_empty() {
                        buf.push('\n');
                    }
                    buf.push_str(trimmed);
                    if depth <= 0 {
                        return Reply::Line(buf);
                    }
                }
                Err(RecvTimeoutError::Timeout) => return Reply::Timeout,
                Err(RecvTimeoutError::Disconnected) => return Reply::Closed,
            }
        }
    }

    pub fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn paren_balance(s: &str) -> i64 {
    let mut depth = 0;
    let mut quoted = false;
    for c in s.chars() {
        match c {
            '|' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            _ => {}
        }
    }
    depth
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.stdin.flush();
        self.kill();
    }
}
