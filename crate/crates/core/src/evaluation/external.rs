use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{invalid, EvalError, Result};
use crate::exec::Parallelism;
use crate::space::{Architecture, SearchSpace};

use super::protocol::{Request, Response};
use super::Evaluator;

enum Incoming {
    Line(String),
    Closed,
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<Incoming>,
}

impl Session {
    fn send(&mut self, req: &Request) -> std::io::Result<()> {
        let mut line = req.to_line();
        line.push('\n');
        self.stdin.write_all(line.as_bytes())?;
        self.stdin.flush()
    }
}

/// Client for an evaluator running as a child process.
///
/// Requests in a batch are written back to back and answers are matched by
/// id, so the evaluator may reply in any order. The process is started on
/// first use, reused across batches and restarted if it exits.
pub struct ExternalEvaluator {
    command: Vec<String>,
    timeout: Duration,
    space: SearchSpace,
    session: Mutex<Option<Session>>,
    next_id: Mutex<u64>,
}

impl ExternalEvaluator {
    pub fn new(command: Vec<String>, timeout_secs: f64, space: SearchSpace) -> Result<Self> {
        if command.is_empty() {
            return Err(invalid("external evaluator command is empty"));
        }
        if !(timeout_secs.is_finite() && timeout_secs > 0.0) {
            return Err(invalid(format!(
                "timeout must be positive, got {timeout_secs}"
            )));
        }
        Ok(Self {
            command,
            timeout: Duration::from_secs_f64(timeout_secs),
            space,
            session: Mutex::new(None),
            next_id: Mutex::new(1),
        })
    }

    fn spawn(&self) -> Result<Session, EvalError> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvalError::Failure(format!("cannot start `{}`: {e}", self.command[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Incoming::Line(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(Incoming::Closed);
        });
        let mut session = Session {
            child,
            stdin,
            lines: rx,
        };
        let init = Request::Init {
            layers: self.space.layers(),
            components: self.space.components().to_vec(),
        };
        session
            .send(&init)
            .map_err(|e| EvalError::Failure(format!("writing init message: {e}")))?;
        match session.lines.recv_timeout(self.timeout) {
            Ok(Incoming::Line(l)) => match Response::parse(&l) {
                Ok(Response::Ready) => Ok(session),
                _ => Err(EvalError::Failure(format!(
                    "expected ready message, got `{l}`"
                ))),
            },
            Ok(Incoming::Closed) | Err(RecvTimeoutError::Disconnected) => Err(EvalError::Failure(
                "evaluator exited during handshake".into(),
            )),
            Err(RecvTimeoutError::Timeout) => Err(EvalError::Failure(format!(
                "no ready message within {:.3}s",
                self.timeout.as_secs_f64()
            ))),
        }
    }

    fn run_batch(
        &self,
        session: &mut Session,
        archs: &[Architecture],
    ) -> (Vec<Result<f64, EvalError>>, bool) {
        let mut out: Vec<Option<Result<f64, EvalError>>> = vec![None; archs.len()];
        let mut pending: HashMap<i64, usize> = HashMap::with_capacity(archs.len());
        let first_id = {
            let mut next = self.next_id.lock().expect("id counter poisoned");
            let first = *next;
            *next += archs.len() as u64;
            first
        };
        for (i, arch) in archs.iter().enumerate() {
            let id = first_id + i as u64;
            let req = Request::Evaluate {
                id,
                architecture: self.space.encode(arch),
            };
            if let Err(e) = session.send(&req) {
                let msg = format!("writing request {id}: {e}");
                for slot in out.iter_mut().filter(|s| s.is_none()) {
                    *slot = Some(Err(EvalError::Failure(msg.clone())));
                }
                return (out.into_iter().map(Option::unwrap).collect(), false);
            }
            pending.insert(id as i64, i);
        }

        let deadline = Instant::now() + self.timeout;
        let mut malformed: Option<String> = None;
        let mut alive = true;
        while !pending.is_empty() {
            let now = Instant::now();
            if now >= deadline {
                break;
            }
            match session.lines.recv_timeout(deadline - now) {
                Ok(Incoming::Line(line)) => match Response::parse(&line) {
                    Ok(Response::Result { id, fitness }) => {
                        if let Some(i) = pending.remove(&id) {
                            out[i] =
                                Some(if fitness.is_finite() && (0.0..=1.0).contains(&fitness) {
                                    Ok(fitness)
                                } else {
                                    Err(EvalError::Failure(format!(
                                        "fitness {fitness} outside [0, 1] for request {id}"
                                    )))
                                });
                        } else {
                            log::debug!("ignoring response for unknown or expired request {id}");
                        }
                    }
                    Ok(Response::Error { id, message }) => {
                        if let Some(i) = pending.remove(&id) {
                            out[i] = Some(Err(EvalError::Rejected(message)));
                        } else {
                            log::warn!(
                                "evaluator error not tied to a pending request ({id}): {message}"
                            );
                        }
                    }
                    Ok(Response::Ready) | Err(_) => {
                        log::warn!("malformed line from evaluator: `{line}`");
                        malformed = Some(line);
                    }
                },
                Ok(Incoming::Closed) | Err(RecvTimeoutError::Disconnected) => {
                    alive = false;
                    break;
                }
                Err(RecvTimeoutError::Timeout) => break,
            }
        }

        for (id, i) in pending {
            out[i] = Some(if !alive {
                Err(EvalError::Failure(format!(
                    "evaluator exited before answering request {id}"
                )))
            } else if let Some(line) = &malformed {
                Err(EvalError::Failure(format!(
                    "malformed line `{line}`; no valid response for request {id}"
                )))
            } else {
                Err(EvalError::Timeout {
                    id: id as u64,
                    secs: self.timeout.as_secs_f64(),
                })
            });
        }
        (
            out.into_iter()
                .map(|r| r.expect("all slots filled"))
                .collect(),
            alive,
        )
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&self, arch: &Architecture) -> Result<f64, EvalError> {
        self.evaluate_many(std::slice::from_ref(arch), Parallelism::Sequential)
            .pop()
            .expect("one result per request")
    }

    fn evaluate_many(
        &self,
        archs: &[Architecture],
        _par: Parallelism,
    ) -> Vec<Result<f64, EvalError>> {
        if archs.is_empty() {
            return Vec::new();
        }
        let mut guard = self.session.lock().expect("session lock poisoned");
        if guard.is_none() {
            match self.spawn() {
                Ok(s) => *guard = Some(s),
                Err(e) => return vec![Err(e); archs.len()],
            }
        }
        let session = guard.as_mut().expect("session present");
        let (results, alive) = self.run_batch(session, archs);
        if !alive {
            if let Some(mut dead) = guard.take() {
                let _ = dead.child.wait();
            }
        }
        results
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        let Ok(slot) = self.session.get_mut() else {
            return;
        };
        let Some(mut session) = slot.take() else {
            return;
        };
        let _ = session.send(&Request::Shutdown);
        drop(session.stdin);
        let deadline = Instant::now() + Duration::from_secs(2);
        loop {
            match session.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(10)),
                _ => break,
            }
        }
        let _ = session.child.kill();
        let _ = session.child.wait();
    }
}
