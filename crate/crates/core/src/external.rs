//! Line-based stdio protocol for external black-box problems.
//!
//! Request: `E v_0 v_1 … v_{n-1}`. Reply: `F <f> G <g_0> … <g_{m-1}>`, with
//! the `G` section omitted when `m = 0`. Numbers are written in Rust's
//! shortest round-trip form so the external side sees the exact point.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, VariablePartition};
use crate::oracle::{Oracle, ProblemInstance, Response};

pub fn format_request(x: &[f64]) -> String {
    let mut line = String::from("E");
    for v in x {
        line.push(' ');
        line.push_str(&format!("{v:?}"));
    }
    line
}

fn parse_number(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Protocol(format!("cannot parse `{tok}` as a number")))?;
    if !v.is_finite() {
        return Err(Error::Protocol(format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

pub fn parse_reply(line: &str, m: usize) -> Result<Response> {
    let mut toks = line.split_whitespace();
    if toks.next() != Some("F") {
        return Err(Error::Protocol(format!(
            "reply must start with `F`: {line:?}"
        )));
    }
    let f = parse_number(
        toks.next()
            .ok_or_else(|| Error::Protocol("missing objective value".into()))?,
    )?;
    let mut g = Vec::with_capacity(m);
    match toks.next() {
        None if m == 0 => {}
        None => {
            return Err(Error::Protocol(format!(
                "missing `G` section, expected {m} values"
            )))
        }
        Some("G") => {
            for tok in toks.by_ref() {
                g.push(parse_number(tok)?);
            }
        }
        Some(other) => return Err(Error::Protocol(format!("unexpected token `{other}`"))),
    }
    if g.len() != m {
        return Err(Error::Protocol(format!(
            "expected {m} constraint values, got {}",
            g.len()
        )));
    }
    Ok(Response { f, g })
}

/// Oracle speaking the protocol over any reader/writer pair.
pub struct StdioOracle<R, W> {
    reader: R,
    writer: W,
    m: usize,
}

impl<R: BufRead + Send, W: Write + Send> StdioOracle<R, W> {
    pub fn new(reader: R, writer: W, m: usize) -> Self {
        Self { reader, writer, m }
    }
}

impl<R: BufRead + Send, W: Write + Send> Oracle for StdioOracle<R, W> {
    fn call(&mut self, x: &[f64]) -> Result<Response> {
        writeln!(self.writer, "{}", format_request(x))
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::Protocol(format!("write to external process failed: {e}")))?;
        let mut line = String::new();
        let read = self
            .reader
            .read_line(&mut line)
            .map_err(|e| Error::Protocol(format!("read from external process failed: {e}")))?;
        if read == 0 {
            return Err(Error::Protocol("external process closed its output".into()));
        }
        parse_reply(line.trim_end(), self.m)
    }
}

/// A child process answering evaluation requests on stdin/stdout.
pub struct ExternalProcess {
    child: Child,
    io: StdioOracle<BufReader<ChildStdout>, ChildStdin>,
}

impl ExternalProcess {
    pub fn spawn(command: &[String], m: usize) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Config("empty external command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(Self {
            child,
            io: StdioOracle::new(BufReader::new(stdout), stdin, m),
        })
    }
}

impl Oracle for ExternalProcess {
    fn call(&mut self, x: &[f64]) -> Result<Response> {
        self.io.call(x)
    }
}

impl Drop for ExternalProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// JSON description of an external problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalProblemSpec {
    pub name: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub integer_indices: Vec<usize>,
    #[serde(default)]
    pub constraints: usize,
    /// Defaults to `(u - l)/2` on continuous and the rounded box midpoint on
    /// integer variables, clamped into the box.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    pub command: Vec<String>,
}

impl ExternalProblemSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn instantiate(&self) -> Result<ProblemInstance> {
        let partition = VariablePartition::new(self.lower.len(), &self.integer_indices)?;
        let bounds = Bounds::new(self.lower.clone(), self.upper.clone(), &partition)?;
        let start = match &self.start {
            Some(s) => s.clone(),
            None => {
                let mut s: Vec<f64> = (0..partition.n())
                    .map(|i| {
                        if partition.is_integer(i) {
                            ((bounds.lower()[i] + bounds.upper()[i]) / 2.0).floor()
                        } else {
                            bounds.width(i) / 2.0
                        }
                    })
                    .collect();
                bounds.project_in_place(&mut s);
                s
            }
        };
        let process = ExternalProcess::spawn(&self.command, self.constraints)?;
        ProblemInstance::new(
            self.name.clone(),
            partition,
            bounds,
            start,
            self.constraints,
            Box::new(process),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn request_format_round_trips() {
        let x = [0.1, 50.0, -1e-300, 1.0 / 3.0];
        let line = format_request(&x);
        assert!(line.starts_with("E "));
        let back: Vec<f64> = line[2..].split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(back, x);
    }

    #[test]
    fn reply_parsing() {
        assert_eq!(parse_reply("F 1.5", 0).unwrap().f, 1.5);
        let r = parse_reply("F -2 G 0.5 -1", 2).unwrap();
        assert_eq!(r.g, vec![0.5, -1.0]);
        assert!(parse_reply("F NaN", 0).is_err());
        assert!(parse_reply("F inf", 0).is_err());
        assert!(parse_reply("X 1", 0).is_err());
        assert!(parse_reply("F 1 G 1", 2).is_err());
        assert!(parse_reply("F 1", 1).is_err());
        assert!(parse_reply("F 1 H 2", 1).is_err());
    }

    #[test]
    fn in_memory_exchange() {
        let input = Cursor::new(b"F 3 G -1\n".to_vec());
        let mut out = Vec::new();
        {
            let mut o = StdioOracle::new(input, &mut out, 1);
            let r = o.call(&[1.0, 2.0]).unwrap();
            assert_eq!(
                r,
                Response {
                    f: 3.0,
                    g: vec![-1.0]
                }
            );
            assert!(matches!(o.call(&[1.0, 2.0]), Err(Error::Protocol(_))));
        }
        assert_eq!(
            String::from_utf8(out).unwrap().lines().next(),
            Some("E 1.0 2.0")
        );
    }
}
